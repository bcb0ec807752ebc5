#include <jetfol/harness.hpp>

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

using jetfol::harness::Report;
using jetfol::harness::ScalarMode;
using jetfol::harness::Scenario;

namespace {

void apply_scenario_file(Scenario& sc, const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw jetfol::error("cannot open scenario file " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("suite"))
        sc.suite = j["suite"].get<std::string>();
    if (j.contains("seed"))
        sc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("order"))
        sc.order = j["order"].get<int>();
    if (j.contains("dim"))
        sc.dim = j["dim"].get<int>();
    if (j.contains("q"))
        sc.q = j["q"].get<int>();
    if (j.contains("d"))
        sc.d = j["d"].get<int>();
    if (j.contains("rank"))
        sc.rank = j["rank"].get<int>();
    if (j.contains("ode_order"))
        sc.ode_order = j["ode_order"].get<int>();
    if (j.contains("trials"))
        sc.trials = j["trials"].get<int>();
    if (j.contains("tolerance"))
        sc.tolerance = j["tolerance"].get<double>();
    if (j.contains("mode"))
        sc.mode = j["mode"].get<std::string>() == "float" ? ScalarMode::floating
                                                          : ScalarMode::exact;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"verify: deterministic checks for the jetfol library"};

    std::string suite;
    std::string valid;
    for (const auto& s : jetfol::harness::suite_names())
        valid += (valid.empty() ? "" : "|") + s;
    app.add_option("suite", suite, "suite to run (" + valid + ")")->required();

    std::uint64_t seed = 0;
    int order = 0, dim = 0, trials = 0;
    std::string mode, format = "text", out, scenario_file;
    auto* seed_opt = app.add_option("--seed", seed, "PRNG seed (or env JETFOL_SEED)");
    auto* order_opt = app.add_option("--order", order, "series truncation order T (4..16)");
    auto* dim_opt = app.add_option("--dim", dim, "projective dimension n (1..4)");
    auto* trials_opt = app.add_option("--trials", trials, "trial count (1..10000)");
    auto* mode_opt = app.add_option("--mode", mode, "scalar mode: exact|float")
                         ->check(CLI::IsMember({"exact", "float"}));
    app.add_option("--format", format, "report format: text|json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_option("--out", out, "output path (default: stdout)");
    app.add_option("--scenario", scenario_file, "JSON scenario file; flags override");

    CLI11_PARSE(app, argc, argv);

    try {
        Scenario sc;
        if (const char* env = std::getenv("JETFOL_SEED"))
            sc.seed = std::strtoull(env, nullptr, 10);
        if (!scenario_file.empty())
            apply_scenario_file(sc, scenario_file);
        sc.suite = suite;
        if (seed_opt->count() > 0)
            sc.seed = seed;
        if (order_opt->count() > 0)
            sc.order = order;
        if (dim_opt->count() > 0)
            sc.dim = dim;
        if (trials_opt->count() > 0)
            sc.trials = trials;
        if (mode_opt->count() > 0)
            sc.mode = mode == "float" ? ScalarMode::floating : ScalarMode::exact;

        Report rep = jetfol::harness::run_suite(sc);
        jetfol::harness::emit_report(rep, format, out);
        return rep.all_passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "verify: " << e.what() << "\n";
        return 2;
    }
}
