#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace mcp::cli;

namespace {

void add_plan_flags(CLI::App* sub, RunConfig& cfg, std::vector<std::string>& instances) {
    sub->add_option("model", cfg.model, "model description (.mmd)")->required();
    sub->add_option("--perf", cfg.perf, "performance definitions")->required();
    sub->add_option("--machine", cfg.machine, "machine description")->required();
    sub->add_option("--pattern", cfg.pattern, "force ES, HMC, RC-static, RC-dynamic or RC-exchange");
    sub->add_option("--primary", cfg.primary, "ES primary submodel (default: dominating cost)");
    sub->add_option("--cycles", cfg.cycles, "iterations to unfold for HMC and RC")->check(CLI::PositiveNumber);
    sub->add_option("--jobs", cfg.jobs, "ES jobs to run")->check(CLI::PositiveNumber);
    sub->add_option("--cores", cfg.cores, "cores to plan for (default: whole machine)")->check(CLI::NonNegativeNumber);
    sub->add_option("--instances", instances, "instances of a dynamic submodel, id=n")->delimiter(',');
    sub->add_option("--mode", cfg.mode, "ES execution mode")->check(CLI::IsMember({"sequential", "interleaved"}));
    sub->add_option("--theta-es", cfg.theta_es, "cost share that makes a submodel ES primary")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--r-seq", cfg.r_seq, "aux/primary time ratio below which ES stays sequential")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--slack-tol", cfg.slack_tol, "period slack allowed when lowering frequencies")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--q", cfg.quality, "RC quality threshold")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--alpha", cfg.alpha, "dynamic power exponent (overrides the machine file)");
    sub->add_option("--energy-budget", cfg.energy_budget, "energy budget recorded in the manifest (J)");
    sub->add_flag("--precompute", cfg.precompute, "HMC: reserve precompute slots");
    sub->add_option("--precompute-slots", cfg.precompute_slots, "HMC: slots to reserve")->check(CLI::NonNegativeNumber);
    sub->add_option("--replica-cores", cfg.replica_cores, "RC: cores per replica")->check(CLI::PositiveNumber);
    sub->add_option("--master-cores", cfg.master_cores, "RC: cores for the master")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out_dir, "output directory");
}

void add_sim_flags(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--seed", cfg.seed, "random seed");
    sub->add_option("--hmc-queries", cfg.hmc_queries, "HMC: micro task query points");
    sub->add_option("--delta-reuse", cfg.delta_reuse, "HMC: reuse distance")->check(CLI::NonNegativeNumber);
    sub->add_flag("!--no-interpolate", cfg.interpolate, "HMC: never interpolate cached results");
    sub->add_option("--hmc-latency", cfg.hmc_latency, "HMC: seconds per manager decision")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Plan and simulate multiscale computing patterns"};
    app.require_subcommand(1);

    std::string model_path, dot_path, json_path, sweep_param, csv_path;
    int cycles = 1;
    std::vector<std::string> instances;
    RunConfig cfg;

    auto* validate = app.add_subcommand("validate", "check a model for errors and deadlocks");
    validate->add_option("model", model_path)->required();

    auto* graph = app.add_subcommand("graph", "unfold a model into a task graph");
    graph->add_option("model", model_path)->required();
    graph->add_option("--cycles", cycles, "iterations to unfold")->required();
    graph->add_option("--dot", dot_path, "write the graph in DOT format");
    graph->add_option("--instances", instances, "instances of a dynamic submodel, id=n")->delimiter(',');

    auto* plan = app.add_subcommand("plan", "classify, plan and emit middleware configuration");
    add_plan_flags(plan, cfg, instances);

    auto* sim = app.add_subcommand("simulate", "simulate a plan");
    add_plan_flags(sim, cfg, instances);
    add_sim_flags(sim, cfg);
    sim->add_option("--json", json_path, "report path ('-' for standard output; default <out>/report.json)");

    auto* sweep = app.add_subcommand("sweep", "sweep P, f or lambda and write CSV");
    add_plan_flags(sweep, cfg, instances);
    add_sim_flags(sweep, cfg);
    sweep->add_option("--param", sweep_param, "P=<lo>..<hi>, P=<list>, f=<list> or lambda=<list>")->required();
    sweep->add_option("--csv", csv_path, "CSV output path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : InputError;
    }

    try {
        cfg.instances = parse_instances(instances);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.code;
    }

    if (*validate) return cmd_validate(model_path, std::cout, std::cerr);
    if (*graph) return cmd_graph(model_path, cycles, dot_path, cfg.instances, std::cout, std::cerr);
    if (*plan) return cmd_plan(cfg, std::cout, std::cerr);
    if (*sim) return cmd_simulate(cfg, json_path, std::cout, std::cerr);
    return cmd_sweep(cfg, sweep_param, csv_path, std::cout, std::cerr);
}
