#pragma once

// Umbrella header for the jetfol library.

#include "connection.hpp"
#include "harness.hpp"
#include "jets.hpp"
#include "linalg.hpp"
#include "maurer_cartan.hpp"
#include "multi_index.hpp"
#include "projective_group.hpp"
#include "rng.hpp"
#include "scalar.hpp"
#include "series.hpp"
#include "series_matrix.hpp"
#include "structure.hpp"
#include "transverse_ode.hpp"
