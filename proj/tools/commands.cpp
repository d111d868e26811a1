// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "moop/error.hpp"
#include "moop/hybrid.hpp"
#include "moop/instance.hpp"
#include "moop/metrics.hpp"
#include "moop/parallel.hpp"
#include "moop/reinforce.hpp"

#ifndef MOOP_VERSION
#define MOOP_VERSION "0.0.0"
#endif

namespace moop::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
    fs::path instance, checkpoint, out, front, manifest;
    std::vector<fs::path> instances;
    std::string engine = "nsga2";
    std::string coding = "single";
    std::string kind;
    std::string ref_preset;
    std::string preset = "desk";
    std::string solvers = "hybrid,nsga2-500-single";
    int pop = 100;
    int gens = -1;
    int seeds = 11;
    int jobs = 1;
    std::uint64_t seed_base = 0;
    // generate
    int cities = 0;
    int profits = 0;
    double tmax = 0.0;
    // train
    int epochs = 0, batch = 0, hidden = 0, validate_every = 0, validation_size = 0;
    long instances_per_epoch = 0;
    double lr = 0.0, dropout = 0.0, init_range = 0.0, max_grad_norm = 0.0;
    bool no_dynamic = false;
};

struct Context {
    std::ostream& out;
    std::ostream& err;
    std::vector<std::string> argv;
    std::string command;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
};

std::string shortest(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, r.ptr);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
    if (!f) throw std::runtime_error("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
    if (dir.empty()) throw ValidationError("--out DIR is required");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
}

double seconds_since(const Context& ctx) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.start).count();
}

void write_manifest(const Context& ctx, const fs::path& dir, json config, json seeds, json artifacts) {
    json m;
    m["command"] = ctx.command;
    m["argv"] = ctx.argv;
    m["cwd"] = fs::current_path().string();
    m["config"] = std::move(config);
    m["seeds"] = std::move(seeds);
    m["artifacts"] = std::move(artifacts);
    m["version"] = MOOP_VERSION;
    m["wall_seconds"] = seconds_since(ctx);
    write_text(dir / "manifest.json", m.dump(2) + "\n");
}

ProblemKind resolve_kind(const Options& o, const Instance& inst) {
    if (!o.kind.empty()) return problem_kind_from_string(o.kind);
    return inst.k_profits == 1 ? ProblemKind::mixed : ProblemKind::three;
}

json run_json(const RunResult& r) {
    return {{"hv", r.hv},
            {"hv_trace", r.hv_trace},
            {"ref", r.ref},
            {"front_size", r.front.size()},
            {"evaluated", r.evaluated},
            {"decoded", r.decoded},
            {"wall_seconds", r.wall_seconds}};
}

json hybrid_json(const HybridConfig& c) {
    return {{"pop", c.pop_size},
            {"gens", c.max_generations},
            {"engine", to_string(c.engine)},
            {"kind", to_string(c.kind)},
            {"seed", c.seed},
            {"jobs", c.jobs},
            {"crossover", c.rates.crossover},
            {"bit_flip", c.rates.bit_flip < 0 ? json("1/L") : json(c.rates.bit_flip)},
            {"inversion", c.rates.inversion}};
}

// ------------------------------------------------------------------ generate

int cmd_generate(const Options& o, Context& ctx) {
    ensure_dir(o.out);
    std::vector<int> sizes(kGridSizes.begin(), kGridSizes.end());
    if (o.cities > 0) sizes = {o.cities};
    std::vector<int> ks{1, 2};
    if (o.profits > 0) ks = {o.profits};
    const std::uint64_t seed = o.seed_base == 0 ? kTestSeed : o.seed_base;
    json files = json::array();
    for (int n : sizes) {
        const double t = o.tmax > 0.0 ? o.tmax : grid_t_max(n);
        if (!(t > 0.0)) throw ValidationError("no grid budget for " + std::to_string(n) + " cities; pass --tmax");
        for (int k : ks) {
            const auto inst = generate_instance(n, k, t, seed);
            const auto path = o.out / (inst.name + ".json");
            save_instance(inst, path);
            files.push_back(path.string());
            ctx.out << path.string() << "\n";
        }
    }
    write_manifest(ctx, o.out, {{"cities", sizes}, {"profits", ks}, {"tmax", o.tmax}}, {seed}, {{"instances", files}});
    return 0;
}

// --------------------------------------------------------------------- train

int cmd_train(const Options& o, Context& ctx, const CLI::App& sub) {
    ensure_dir(o.out);
    TrainConfig c = o.preset == "full" ? TrainConfig::paper() : TrainConfig::desk();
    if (sub.count("--epochs")) c.epochs = o.epochs;
    if (sub.count("--batch")) c.batch_size = o.batch;
    if (sub.count("--instances-per-epoch")) c.instances_per_epoch = o.instances_per_epoch;
    if (sub.count("--lr")) c.lr = o.lr;
    if (sub.count("--dropout")) c.dropout = o.dropout;
    if (sub.count("--hidden")) c.hidden = o.hidden;
    if (sub.count("--cities")) c.cities = o.cities;
    if (sub.count("--init-range")) c.init_range = o.init_range;
    if (sub.count("--max-grad-norm")) c.max_grad_norm = o.max_grad_norm;
    if (sub.count("--validate-every")) c.validate_every = o.validate_every;
    if (sub.count("--validation-size")) c.validation_size = o.validation_size;
    if (sub.count("--seed-base")) c.seed = o.seed_base;
    if (o.no_dynamic) c.use_dynamic = false;
    c.dump_path = o.out / "diverged.json";

    const auto ckpt_path = o.out / "checkpoint.json";
    const auto log_path = o.out / "train_log.csv";
    const TrainResult r = train(c, [&](const TrainLogRow& row) {
        if (row.validation_cost)
            ctx.err << "batch " << row.batch << " validation " << *row.validation_cost << "\n";
    });
    save_checkpoint(r.checkpoint, ckpt_path);
    write_train_log_csv(r.log, log_path);
    ctx.out << "initial validation " << shortest(r.initial_validation_cost) << "\nfinal validation "
            << shortest(r.final_validation_cost) << "\n";

    json config = {{"preset", o.preset},       {"epochs", c.epochs},
                   {"batch", c.batch_size},    {"instances_per_epoch", c.instances_per_epoch},
                   {"lr", c.lr},               {"dropout", c.dropout},
                   {"hidden", c.hidden},       {"cities", c.cities},
                   {"init_range", c.init_range}, {"max_grad_norm", c.max_grad_norm},
                   {"use_dynamic", c.use_dynamic}, {"validate_every", c.validate_every},
                   {"validation_size", c.validation_size}};
    write_manifest(ctx, o.out, config, {{"train", c.seed}, {"validation", c.validation_seed}},
                   {{"checkpoint", ckpt_path.string()}, {"train_log", log_path.string()}});
    return 0;
}

// ------------------------------------------------------------ solve/baseline

HybridConfig hybrid_config(const Options& o, const Instance& inst, int default_gens) {
    HybridConfig c;
    c.pop_size = o.pop;
    c.max_generations = o.gens >= 0 ? o.gens : default_gens;
    c.engine = engine_from_string(o.engine);
    c.kind = resolve_kind(o, inst);
    c.seed = o.seed_base;
    c.jobs = o.jobs;
    return c;
}

Instance require_instance(const fs::path& path) {
    if (path.empty()) throw ValidationError("--instance PATH is required");
    return load_instance(path);
}

int finish_run(const Options& o, Context& ctx, const Instance& inst, const HybridConfig& c, const RunResult& r,
               json config) {
    const auto front_path = o.out / "front.csv";
    const auto run_path = o.out / "run.json";
    write_front_csv(front_path, r.front, c.kind);
    json meta = config;
    meta["instance"] = inst.name;
    meta["result"] = run_json(r);
    write_text(run_path, meta.dump(2) + "\n");
    ctx.out << "hv " << shortest(r.hv) << "\nfront " << r.front.size() << "\n";
    write_manifest(ctx, o.out, std::move(config), {c.seed},
                   {{"instance", o.instance.string()}, {"front", front_path.string()}, {"run", run_path.string()}});
    return 0;
}

int cmd_solve(const Options& o, Context& ctx) {
    ensure_dir(o.out);
    const Instance inst = require_instance(o.instance);
    if (o.checkpoint.empty()) throw ValidationError("--checkpoint PATH is required (train one with `moop train`)");
    const Checkpoint ckpt = load_checkpoint(o.checkpoint);
    const HybridConfig c = hybrid_config(o, inst, 20);
    const RunResult r = run_moea_drl(inst, ckpt.model.actor, c);
    json config = hybrid_json(c);
    config["solver"] = "hybrid";
    config["checkpoint"] = o.checkpoint.string();
    return finish_run(o, ctx, inst, c, r, config);
}

int cmd_baseline(const Options& o, Context& ctx) {
    ensure_dir(o.out);
    const Instance inst = require_instance(o.instance);
    const HybridConfig c = hybrid_config(o, inst, 500);
    const Coding coding = coding_from_string(o.coding);
    const RunResult r = run_pure_moea(inst, c, coding);
    json config = hybrid_json(c);
    config["solver"] = "baseline";
    config["coding"] = to_string(coding);
    return finish_run(o, ctx, inst, c, r, config);
}

// ----------------------------------------------------------------- benchmark

struct SolverSpec {
    std::string name;
    bool hybrid = false;
    Engine engine = Engine::nsga2;
    int gens = 20;
    Coding coding = Coding::single;
};

// hybrid[-nsga2|-nsga3][-GENS]  or  nsga2|nsga3-GENS-single|double
SolverSpec parse_solver(const std::string& text, const Options& o) {
    SolverSpec s;
    s.name = text;
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, '-');) parts.push_back(p);
    auto gens_of = [&](const std::string& p) {
        int g = 0;
        const auto r = std::from_chars(p.data(), p.data() + p.size(), g);
        if (r.ec != std::errc{} || r.ptr != p.data() + p.size() || g < 0)
            throw ValidationError("bad generation count '" + p + "' in solver '" + text + "'");
        return g;
    };
    if (parts.empty()) throw ValidationError("empty solver name");
    if (parts[0] == "hybrid") {
        s.hybrid = true;
        s.engine = engine_from_string(o.engine);
        s.gens = o.gens >= 0 ? o.gens : 20;
        for (std::size_t i = 1; i < parts.size(); ++i) {
            if (parts[i] == "nsga2" || parts[i] == "nsga3")
                s.engine = engine_from_string(parts[i]);
            else
                s.gens = gens_of(parts[i]);
        }
        return s;
    }
    if (parts.size() != 3)
        throw ValidationError("unknown solver '" + text + "' (expected hybrid[-ENGINE][-GENS] or ENGINE-GENS-CODING)");
    s.engine = engine_from_string(parts[0]);
    s.gens = gens_of(parts[1]);
    s.coding = coding_from_string(parts[2]);
    return s;
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

int cmd_benchmark(const Options& o, Context& ctx) {
    ensure_dir(o.out);
    std::vector<fs::path> paths = o.instances;
    if (!o.instance.empty()) paths.insert(paths.begin(), o.instance);
    if (paths.empty()) throw ValidationError("--instance or --instances is required");
    if (o.seeds < 1) throw ValidationError("--seeds must be >= 1");
    std::vector<Instance> insts;
    for (const auto& p : paths) insts.push_back(load_instance(p));

    std::vector<SolverSpec> solvers;
    std::stringstream ss(o.solvers);
    for (std::string s; std::getline(ss, s, ',');)
        if (!s.empty()) solvers.push_back(parse_solver(s, o));
    if (solvers.empty()) throw ValidationError("--solvers lists no solvers");

    std::optional<Checkpoint> ckpt;
    if (std::any_of(solvers.begin(), solvers.end(), [](const auto& s) { return s.hybrid; })) {
        if (o.checkpoint.empty()) throw ValidationError("hybrid solvers need --checkpoint PATH");
        ckpt = load_checkpoint(o.checkpoint);
    }

    struct Job {
        std::size_t inst, solver;
        int run;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < insts.size(); ++i)
        for (std::size_t s = 0; s < solvers.size(); ++s)
            for (int r = 0; r < o.seeds; ++r) jobs.push_back({i, s, r});

    const fs::path front_dir = o.out / "fronts";
    ensure_dir(front_dir);
    std::vector<RunResult> results(jobs.size());
    std::vector<HybridConfig> configs(jobs.size());
    parallel_for(jobs.size(), static_cast<std::size_t>(std::max(o.jobs, 1)), [&](std::size_t j) {
        const auto& job = jobs[j];
        const auto& inst = insts[job.inst];
        const auto& sv = solvers[job.solver];
        HybridConfig c;
        c.pop_size = o.pop;
        c.max_generations = sv.gens;
        c.engine = sv.engine;
        c.kind = resolve_kind(o, inst);
        c.seed = o.seed_base + static_cast<std::uint64_t>(job.run);
        c.jobs = 1;
        configs[j] = c;
        results[j] = sv.hybrid ? run_moea_drl(inst, ckpt->model.actor, c) : run_pure_moea(inst, c, sv.coding);
        write_front_csv(front_dir / (inst.name + "_" + sv.name + "_" + std::to_string(c.seed) + ".csv"), results[j].front,
                        c.kind);
    });

    std::ostringstream runs;
    runs << "instance,solver,seed,hv,seconds,evaluated,front_size\n";
    for (std::size_t j = 0; j < jobs.size(); ++j)
        runs << insts[jobs[j].inst].name << ',' << solvers[jobs[j].solver].name << ',' << configs[j].seed << ','
             << shortest(results[j].hv) << ',' << shortest(results[j].wall_seconds) << ',' << results[j].evaluated
             << ',' << results[j].front.size() << '\n';
    write_text(o.out / "runs.csv", runs.str());

    std::ostringstream summary;
    summary << "instance,solver,runs,median_hv,mean_hv,mean_seconds\n";
    ctx.out << "instance                solver                    median_hv       mean_hv    mean_s\n";
    for (std::size_t i = 0; i < insts.size(); ++i) {
        for (std::size_t s = 0; s < solvers.size(); ++s) {
            std::vector<double> hv;
            double secs = 0.0;
            for (std::size_t j = 0; j < jobs.size(); ++j)
                if (jobs[j].inst == i && jobs[j].solver == s) {
                    hv.push_back(results[j].hv);
                    secs += results[j].wall_seconds;
                }
            double mean = 0.0;
            for (double h : hv) mean += h;
            mean /= static_cast<double>(hv.size());
            secs /= static_cast<double>(hv.size());
            summary << insts[i].name << ',' << solvers[s].name << ',' << hv.size() << ',' << shortest(median(hv)) << ','
                    << shortest(mean) << ',' << shortest(secs) << '\n';
            char line[160];
            std::snprintf(line, sizeof line, "%-23s %-22s %12.6g %13.6g %9.3f\n", insts[i].name.c_str(),
                          solvers[s].name.c_str(), median(hv), mean, secs);
            ctx.out << line;
        }
    }
    write_text(o.out / "summary.csv", summary.str());

    json seeds = json::array();
    for (int r = 0; r < o.seeds; ++r) seeds.push_back(o.seed_base + static_cast<std::uint64_t>(r));
    json inst_paths = json::array();
    for (const auto& p : paths) inst_paths.push_back(p.string());
    write_manifest(ctx, o.out,
                   {{"solvers", o.solvers}, {"pop", o.pop}, {"seeds", o.seeds}, {"seed_base", o.seed_base},
                    {"engine", o.engine}, {"kind", o.kind}, {"jobs", o.jobs}, {"checkpoint", o.checkpoint.string()}},
                   seeds,
                   {{"instances", inst_paths},
                    {"runs", (o.out / "runs.csv").string()},
                    {"summary", (o.out / "summary.csv").string()},
                    {"fronts", front_dir.string()}});
    return 0;
}

// ------------------------------------------------------------------------ hv

int cmd_hv(const Options& o, Context& ctx) {
    if (o.front.empty()) throw ValidationError("--front PATH is required");
    if (o.ref_preset.empty()) throw ValidationError("--ref-preset NAME is required (e.g. mixed-20)");
    const auto& preset = reference_preset(o.ref_preset);
    const auto rows = read_front_csv(o.front);
    std::vector<std::vector<double>> pts;
    for (const auto& r : rows) {
        if (r.objectives.size() != preset.ref.size())
            throw ValidationError("front has " + std::to_string(r.objectives.size()) + " objectives but preset '" +
                                  preset.name + "' has " + std::to_string(preset.ref.size()));
        pts.push_back(r.objectives);
    }
    const double hv = hypervolume(pts, preset.ref);
    ctx.out << shortest(hv) << "\n";
    if (!o.out.empty()) {
        ensure_dir(o.out);
        write_text(o.out / "hv.json", json{{"hv", hv}, {"ref", preset.ref}, {"points", pts.size()}}.dump(2) + "\n");
        write_manifest(ctx, o.out, {{"ref_preset", preset.name}, {"front", o.front.string()}}, json::array(),
                       {{"hv", (o.out / "hv.json").string()}});
    }
    return 0;
}

// --------------------------------------------------------------------- rerun

std::vector<std::string> manifest_argv(const fs::path& path, const fs::path& out_override) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open manifest " + path.string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(path.string(), std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!m.contains("argv") || !m["argv"].is_array()) throw ParseError("argv", "manifest has no argv array");
    auto argv = m["argv"].get<std::vector<std::string>>();
    if (!argv.empty() && argv.front() == "rerun") throw ValidationError("manifest records a rerun; use the original");
    // Relative paths were relative to the recording directory.
    const fs::path cwd = m.value("cwd", std::string{});
    if (!cwd.empty()) {
        static const std::vector<std::string> path_flags{"--instance", "--instances", "--checkpoint", "--front", "--out"};
        bool in_path_list = false;
        for (std::size_t i = 1; i < argv.size(); ++i) {
            if (argv[i].starts_with("--")) {
                in_path_list = std::find(path_flags.begin(), path_flags.end(), argv[i]) != path_flags.end();
                continue;
            }
            if (in_path_list && fs::path(argv[i]).is_relative()) argv[i] = (cwd / argv[i]).lexically_normal().string();
            if (argv[i - 1] != "--instances") in_path_list = false;
        }
    }
    if (!out_override.empty()) {
        auto it = std::find(argv.begin(), argv.end(), "--out");
        if (it != argv.end() && std::next(it) != argv.end())
            *std::next(it) = out_override.string();
        else {
            argv.push_back("--out");
            argv.push_back(out_override.string());
        }
    }
    return argv;
}

void add_common(CLI::App* sub, Options& o) {
    sub->add_option("--pop", o.pop, "Population size")->check(CLI::PositiveNumber);
    sub->add_option("--gens", o.gens, "Generations")->check(CLI::NonNegativeNumber);
    sub->add_option("--engine", o.engine, "MOEA engine")->check(CLI::IsMember({"nsga2", "nsga3"}));
    sub->add_option("--kind", o.kind, "Objectives: mixed, three or profits (default from the instance)")
        ->check(CLI::IsMember({"mixed", "three", "profits"}));
    sub->add_option("--seed-base", o.seed_base, "Seed (benchmark run i uses seed-base + i)");
    sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory")->required();
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Multi-objective orienteering with evolutionary selection and a learned router", "moop"};
    app.require_subcommand(1);
    app.set_version_flag("--version", MOOP_VERSION);

    auto* gen = app.add_subcommand("generate", "Write benchmark instances for the size grid");
    gen->add_option("--out", o.out, "Output directory")->required();
    gen->add_option("--cities", o.cities, "Only this city count")->check(CLI::Range(2, 1000000));
    gen->add_option("--profits", o.profits, "Profit columns (1 or 2; default both)")->check(CLI::Range(1, 2));
    gen->add_option("--tmax", o.tmax, "Tour budget (default from the grid)")->check(CLI::PositiveNumber);
    gen->add_option("--seed-base", o.seed_base, "Generator seed (default 12345)");

    auto* tr = app.add_subcommand("train", "Train the router with REINFORCE");
    tr->add_option("--out", o.out, "Output directory")->required();
    tr->add_option("--preset", o.preset, "Base settings")->check(CLI::IsMember({"desk", "full"}));
    tr->add_option("--epochs", o.epochs)->check(CLI::NonNegativeNumber);
    tr->add_option("--batch", o.batch)->check(CLI::PositiveNumber);
    tr->add_option("--instances-per-epoch", o.instances_per_epoch)->check(CLI::NonNegativeNumber);
    tr->add_option("--lr", o.lr)->check(CLI::PositiveNumber);
    tr->add_option("--dropout", o.dropout)->check(CLI::Range(0.0, 0.999));
    tr->add_option("--hidden", o.hidden)->check(CLI::PositiveNumber);
    tr->add_option("--cities", o.cities, "Cities per training instance")->check(CLI::Range(2, 100000));
    tr->add_option("--init-range", o.init_range, "Uniform init half-width (0 = fan-in scaled)")
        ->check(CLI::NonNegativeNumber);
    tr->add_option("--max-grad-norm", o.max_grad_norm, "Gradient norm cap (0 = off)")->check(CLI::NonNegativeNumber);
    tr->add_option("--validate-every", o.validate_every)->check(CLI::NonNegativeNumber);
    tr->add_option("--validation-size", o.validation_size)->check(CLI::PositiveNumber);
    tr->add_option("--seed-base", o.seed_base, "Training seed");
    tr->add_flag("--no-dynamic", o.no_dynamic, "Zero the dynamic features (ablation)");

    auto* solve = app.add_subcommand("solve", "Run the hybrid MOEA with the learned router");
    solve->add_option("--instance", o.instance)->required();
    solve->add_option("--checkpoint", o.checkpoint)->required();
    add_common(solve, o);

    auto* base = app.add_subcommand("baseline", "Run a pure MOEA with permutation coding");
    base->add_option("--instance", o.instance)->required();
    base->add_option("--coding", o.coding)->check(CLI::IsMember({"single", "double"}));
    add_common(base, o);

    auto* bench = app.add_subcommand("benchmark", "Repeated runs of several solvers; median/mean HV table");
    bench->add_option("--instance", o.instance);
    bench->add_option("--instances", o.instances, "More instance files");
    bench->add_option("--checkpoint", o.checkpoint);
    bench->add_option("--solvers", o.solvers, "Comma list: hybrid[-ENGINE][-GENS], ENGINE-GENS-single|double");
    bench->add_option("--seeds", o.seeds, "Runs per solver")->check(CLI::PositiveNumber);
    add_common(bench, o);

    auto* hv = app.add_subcommand("hv", "Hypervolume of a front CSV");
    hv->add_option("--front", o.front)->required();
    hv->add_option("--ref-preset", o.ref_preset, "e.g. mixed-20, three-200, profits-50")->required();
    hv->add_option("--out", o.out, "Also write hv.json and a manifest here");

    auto* rerun = app.add_subcommand("rerun", "Repeat the command recorded in a manifest");
    rerun->add_option("--manifest", o.manifest)->required();
    rerun->add_option("--out", o.out, "Write to this directory instead of the recorded one");

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    Context ctx{out, err, args, args.empty() ? std::string{} : args.front()};
    try {
        if (*rerun) return run(manifest_argv(o.manifest, o.out), out, err);
        if (*gen) return cmd_generate(o, ctx);
        if (*tr) return cmd_train(o, ctx, *tr);
        if (*solve) return cmd_solve(o, ctx);
        if (*base) return cmd_baseline(o, ctx);
        if (*bench) return cmd_benchmark(o, ctx);
        if (*hv) return cmd_hv(o, ctx);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace moop::cli
