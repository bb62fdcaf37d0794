#include "CLI11.hpp"
#include "leakbound/cli.hpp"

int main(int argc, char** argv) {
    leakbound::RunConfig config;
    CLI::App app{
        "Privacy-utility trade-off bounds and disclosure mechanism design "
        "for finite joint distributions"};
    app.add_option("--input", config.input,
                   "joint distribution JSON ({\"p_xy\": [[...], ...]})")
        ->required();
    app.add_option("--command", config.command, "what to compute")
        ->required()
        ->check(CLI::IsMember({"validate", "measures", "bounds", "sweep",
                               "mechanism", "oracle-verify"}));
    app.add_option("--eps", config.eps, "privacy budget (single point)");
    app.add_option("--eps-start", config.eps_start,
                   "sweep grid start (default 0)");
    app.add_option("--eps-stop", config.eps_stop,
                   "sweep grid stop (default: 1.2x the safe radius)");
    app.add_option("--eps-count", config.eps_count,
                   "sweep grid size (default 50)");
    app.add_option("--criterion", config.criterion,
                   "privacy criterion: 1 (joint-weighted), 2 (conditional), "
                   "or both")
        ->check(CLI::IsMember({"1", "2", "both"}));
    app.add_option("--base", config.base, "entropy unit")
        ->check(CLI::IsMember({"bits", "nats"}));
    app.add_option("--seed", config.seed, "oracle RNG seed (default 12345)");
    app.add_option("--out", config.out,
                   "write the primary output to this file instead of stdout");
    app.add_option("--dump-lp", config.dump_lp,
                   "write the design LP in LP text format (mechanism/lp)");
    app.add_option("--dump-omega", config.dump_omega,
                   "write the support-set geometry as JSON (mechanism/lp)");
    app.add_option("--method", config.method, "mechanism construction")
        ->check(CLI::IsMember({"lp", "frl", "efrl"}));
    app.add_option("--slack", config.slack,
                   "oracle-verify lower-bound allowance (default 0.02)");
    app.add_option("--budget", config.budget,
                   "oracle evaluation budget (default 20000000)");
    app.add_option("--threads", config.threads,
                   "worker threads (default: hardware, capped at 8)");
    CLI11_PARSE(app, argc, argv);
    return leakbound::run(config);
}
