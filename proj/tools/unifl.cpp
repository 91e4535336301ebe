// unifl: generate, solve, train on, and verify Uniform Facility Location
// instances. All randomness flows from explicit --seed flags.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <atomic>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "unifl/expectation.hpp"
#include "unifl/instance.hpp"
#include "unifl/mpnn.hpp"
#include "unifl/oracle.hpp"
#include "unifl/radius.hpp"
#include "unifl/rng.hpp"
#include "unifl/sampling.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace unifl;

namespace {

// Worker count: hardware concurrency capped by UNIFL_THREADS.
int thread_budget() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("UNIFL_THREADS")) {
        int cap = std::atoi(env);
        if (cap >= 1) hw = std::min(hw, static_cast<unsigned>(cap));
    }
    return static_cast<int>(hw);
}

// Runs fn(i) for i in [0, count) across threads; fn must only touch slot i
// of its output, so the result is schedule-independent.
template <class Fn>
void parallel_for(int count, Fn&& fn) {
    int workers = std::min(thread_budget(), std::max(1, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    for (auto& t : pool) t.join();
}

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_json(const json& j, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << j.dump(2) << std::endl;
        return;
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

std::vector<UniflInstance> load_dir(const fs::path& dir) {
    std::vector<UniflInstance> out;
    std::vector<fs::path> files;
    if (!fs::exists(dir)) throw IoError("no such directory: " + dir.string());
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".unifl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(load_instance(f.string()));
    return out;
}

// Ratio denominator: exact optimum when in exhaustive reach, greedy otherwise.
std::pair<double, std::string> reference_value(const UniflInstance& inst) {
    if (inst.n <= kExhaustiveLimit) return {exact_opt(inst).opt_value, "exact"};
    return {greedy_upper_bound(inst).total, "greedy"};
}

json run_report(const UniflInstance& inst, const std::string& algo, const std::string& digest,
                double open, double con, double total, int samples, double se, double wall_ms,
                std::uint64_t seed, bool with_ratio) {
    json j{{"instance_id", inst.id}, {"algo", algo},       {"params_digest", digest},
           {"open_cost", open},      {"connection_cost", con}, {"total", total},
           {"samples", samples},     {"std_error", se},    {"wall_time_ms", wall_ms},
           {"seed", seed}};
    if (with_ratio) {
        auto [ref, kind] = reference_value(inst);
        j["ratio_vs"] = kind;
        j["ratio"] = total / ref;
        j["reference_total"] = ref;
    }
    return j;
}

struct SolveStats {
    double open = 0.0, con = 0.0, total = 0.0, se = 0.0;
};

SolveStats average_samples(const UniflInstance& inst, const OpeningProbabilities& probs,
                           int samples, std::uint64_t seed) {
    SolveStats s;
    double sumsq = 0.0;
    for (int i = 0; i < samples; ++i) {
        Solution sol = sample_simple(inst, probs, derive(seed, static_cast<std::uint64_t>(i)));
        s.open += sol.open_cost;
        s.con += sol.connection_cost;
        s.total += sol.total;
        sumsq += sol.total * sol.total;
    }
    s.open /= samples;
    s.con /= samples;
    s.total /= samples;
    if (samples > 1) {
        double var = (sumsq - samples * s.total * s.total) / (samples - 1);
        s.se = std::sqrt(std::max(0.0, var) / samples);
    }
    return s;
}

SolveStats average_recursion(const UniflInstance& inst, const RadiusTable& radii, double c,
                             int samples, std::uint64_t seed, const RecursionOptions& opts) {
    SolveStats s;
    double sumsq = 0.0;
    for (int i = 0; i < samples; ++i) {
        Solution sol = run_recursion(inst, radii, c, derive(seed, static_cast<std::uint64_t>(i)), opts);
        s.open += sol.open_cost;
        s.con += sol.connection_cost;
        s.total += sol.total;
        sumsq += sol.total * sol.total;
    }
    s.open /= samples;
    s.con /= samples;
    s.total /= samples;
    if (samples > 1) {
        double var = (sumsq - samples * s.total * s.total) / (samples - 1);
        s.se = std::sqrt(std::max(0.0, var) / samples);
    }
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uniform Facility Location toolkit"};
    app.require_subcommand(1);

    // ---- gen -------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate geometric instances");
    GeneratorConfig gc;
    std::string gen_out, gen_dir;
    int gen_count = 1;
    gen->add_option("--n", gc.n, "vertex count")->required();
    gen->add_option("--dim", gc.dim, "Euclidean dimension");
    gen->add_option("--components", gc.components, "Gaussian mixture components");
    gen->add_option("--std", gc.component_std, "component standard deviation");
    gen->add_option("--scale", gc.domain_scale, "centroid box side length");
    gen->add_option("--seed", gc.seed, "RNG seed");
    gen->add_option("--out", gen_out, "output instance file (single instance)");
    gen->add_option("--dir", gen_dir, "dataset directory (with --count, makes train/val/test)");
    gen->add_option("--count", gen_count, "number of instances for --dir mode");

    // ---- radii -----------------------------------------------------------
    auto* radii_cmd = app.add_subcommand("radii", "compute per-vertex radii");
    std::string radii_in, radii_out;
    radii_cmd->add_option("--in", radii_in)->required();
    radii_cmd->add_option("--out", radii_out, "output JSON (default stdout)");

    // ---- solve -----------------------------------------------------------
    auto* solve = app.add_subcommand("solve", "run a randomized algorithm");
    std::string solve_in, solve_algo = "simple", solve_out, solve_params;
    double solve_c = 2.0;
    int solve_samples = 1000, solve_max_rounds = 100;
    std::uint64_t solve_seed = 0;
    bool solve_recompute = false, solve_dump = false;
    solve->add_option("--in", solve_in)->required();
    solve->add_option("--algo", solve_algo, "simple|recursive|mpnn");
    solve->add_option("--c", solve_c, "probability scale constant");
    solve->add_option("--samples", solve_samples);
    solve->add_option("--seed", solve_seed);
    solve->add_option("--out", solve_out);
    solve->add_option("--params", solve_params, "trained params (algo mpnn)");
    solve->add_option("--max-rounds", solve_max_rounds);
    solve->add_flag("--recompute-radii", solve_recompute, "per-round radii (recursive)");
    solve->add_flag("--dump-samples", solve_dump, "include per-sample totals");

    // ---- train -----------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "unsupervised training on a dataset");
    std::string train_data, train_out = "params.json", train_metric = "linear",
                train_agg = "sum", train_opt = "adaptive-moment";
    int train_k = 32, train_layers = 1, train_hidden = 8;
    TrainConfig tc;
    double train_c = 2.0;
    train_cmd->add_option("--data", train_data, "dataset dir with train/ and val/")->required();
    train_cmd->add_option("--k", train_k, "discretization bins");
    train_cmd->add_option("--c", train_c, "initialization constant");
    train_cmd->add_option("--layers", train_layers);
    train_cmd->add_option("--hidden", train_hidden);
    train_cmd->add_option("--lr", tc.lr);
    train_cmd->add_option("--steps", tc.steps, "max epochs");
    train_cmd->add_option("--patience", tc.early_stop_patience);
    train_cmd->add_option("--batch", tc.batch_size);
    train_cmd->add_option("--seed", tc.seed);
    train_cmd->add_option("--metric", train_metric, "linear|squared");
    train_cmd->add_option("--aggregation", train_agg, "sum|normalized-sum");
    train_cmd->add_option("--optimizer", train_opt, "plain-gradient|momentum|adaptive-moment");
    train_cmd->add_option("--out", train_out);

    // ---- eval ------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "closed-form expected cost");
    std::string eval_in, eval_probs, eval_metric = "linear", eval_out;
    eval_cmd->add_option("--in", eval_in)->required();
    eval_cmd->add_option("--probs", eval_probs, "JSON array of probabilities")->required();
    eval_cmd->add_option("--metric", eval_metric, "linear|squared");
    eval_cmd->add_option("--out", eval_out);

    // ---- exact -----------------------------------------------------------
    auto* exact_cmd = app.add_subcommand("exact", "exhaustive exact optimum");
    std::string exact_in, exact_out;
    exact_cmd->add_option("--in", exact_in)->required();
    exact_cmd->add_option("--out", exact_out);

    // ---- tune ------------------------------------------------------------
    auto* tune = app.add_subcommand("tune", "grid search for the constant c");
    std::string tune_data, tune_algo = "simple", tune_out;
    double grid_lo = 0.001, grid_hi = 10.0;
    int grid_n = 100, tune_samples = 100;
    std::uint64_t tune_seed = 0;
    tune->add_option("--data", tune_data, "dataset dir (train/ split is used)")->required();
    tune->add_option("--algo", tune_algo, "simple|recursive");
    tune->add_option("--grid-lo", grid_lo);
    tune->add_option("--grid-hi", grid_hi);
    tune->add_option("--grid-n", grid_n);
    tune->add_option("--samples", tune_samples);
    tune->add_option("--seed", tune_seed);
    tune->add_option("--out", tune_out);

    // ---- export-ilp ------------------------------------------------------
    auto* ilp = app.add_subcommand("export-ilp", "write the CPLEX-LP formulation");
    std::string ilp_in, ilp_out = "model.lp";
    ilp->add_option("--in", ilp_in)->required();
    ilp->add_option("--out", ilp_out);

    // ---- bench -----------------------------------------------------------
    auto* bench = app.add_subcommand("bench", "tune baselines, train, compare on test");
    std::string bench_dir, bench_out, bench_csv;
    int bench_samples = 1000, bench_grid_n = 100, bench_steps = 200;
    std::uint64_t bench_seed = 0;
    bench->add_option("--dir", bench_dir, "dataset dir with train/ val/ test/")->required();
    bench->add_option("--samples", bench_samples);
    bench->add_option("--grid-n", bench_grid_n);
    bench->add_option("--steps", bench_steps, "training epochs");
    bench->add_option("--seed", bench_seed);
    bench->add_option("--out", bench_out);
    bench->add_option("--csv", bench_csv, "also emit a CSV table");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            if (!gen_dir.empty()) {
                // 8:1:1 split with an index manifest.
                fs::create_directories(fs::path(gen_dir) / "train");
                fs::create_directories(fs::path(gen_dir) / "val");
                fs::create_directories(fs::path(gen_dir) / "test");
                json manifest{{"config",
                               {{"n", gc.n}, {"dim", gc.dim}, {"components", gc.components},
                                {"std", gc.component_std}, {"scale", gc.domain_scale},
                                {"seed", gc.seed}, {"count", gen_count}}},
                              {"files", json::array()}};
                double degree_sum = 0.0;
                for (int i = 0; i < gen_count; ++i) {
                    GeneratorConfig one = gc;
                    one.seed = derive(gc.seed, static_cast<std::uint64_t>(i));
                    UniflInstance inst = generate_geometric(one);
                    degree_sum += inst.mean_degree();
                    const char* split = (i % 10 < 8) ? "train" : (i % 10 == 8 ? "val" : "test");
                    fs::path file = fs::path(gen_dir) / split / (inst.id + ".unifl");
                    save_instance(inst, file.string());
                    manifest["files"].push_back({{"path", file.string()}, {"split", split}});
                }
                manifest["mean_degree"] = degree_sum / gen_count;
                write_json(manifest, (fs::path(gen_dir) / "index.json").string());
                std::cout << json{{"dir", gen_dir}, {"count", gen_count},
                                  {"mean_degree", degree_sum / gen_count}}
                                 .dump(2)
                          << std::endl;
            } else {
                UniflInstance inst = generate_geometric(gc);
                if (!gen_out.empty()) save_instance(inst, gen_out);
                std::cout << json{{"id", inst.id}, {"n", inst.n},
                                  {"mean_degree", inst.mean_degree()},
                                  {"out", gen_out}}
                                 .dump(2)
                          << std::endl;
            }
        } else if (*radii_cmd) {
            UniflInstance inst = load_instance(radii_in);
            RadiusTable table = compute_radii(inst);
            write_json(json(table.r), radii_out);
        } else if (*solve) {
            UniflInstance inst = load_instance(solve_in);
            RadiusTable radii = compute_radii(inst);
            std::string digest = fnv1a_hex(solve_algo + "/" + std::to_string(solve_c));
            double t0 = now_ms();
            SolveStats stats;
            if (solve_algo == "simple") {
                OpeningProbabilities probs = probs_simple(inst, radii, solve_c);
                stats = average_samples(inst, probs, solve_samples, solve_seed);
            } else if (solve_algo == "recursive") {
                RecursionOptions opts;
                opts.max_rounds = solve_max_rounds;
                opts.recompute_radii = solve_recompute;
                stats = average_recursion(inst, radii, solve_c, solve_samples, solve_seed, opts);
            } else if (solve_algo == "mpnn") {
                if (solve_params.empty()) throw Error("--params required for --algo mpnn");
                MpnnParams params = load_params(solve_params);
                std::ifstream pf(solve_params);
                digest = fnv1a_hex(std::string(std::istreambuf_iterator<char>(pf), {}));
                OpeningProbabilities probs = forward(params, inst);
                stats = average_samples(inst, probs, solve_samples, solve_seed);
            } else {
                throw Error("unknown --algo " + solve_algo);
            }
            json j = run_report(inst, solve_algo, digest, stats.open, stats.con, stats.total,
                                solve_samples, stats.se, now_ms() - t0, solve_seed, true);
            if (solve_dump) {
                json dump = json::array();
                if (solve_algo != "recursive") {
                    OpeningProbabilities probs =
                        solve_algo == "simple"
                            ? probs_simple(inst, radii, solve_c)
                            : forward(load_params(solve_params), inst);
                    for (int i = 0; i < solve_samples; ++i)
                        dump.push_back(
                            sample_simple(inst, probs, derive(solve_seed, (std::uint64_t)i)).total);
                }
                j["per_sample_total"] = dump;
            }
            write_json(j, solve_out);
        } else if (*train_cmd) {
            auto train_set = load_dir(fs::path(train_data) / "train");
            auto val_set = load_dir(fs::path(train_data) / "val");
            if (train_set.empty()) throw Error("no training instances in " + train_data);
            tc.metric = train_metric == "squared" ? ConnectionMetric::Squared
                                                  : ConnectionMetric::Linear;
            tc.optimizer = train_opt == "plain-gradient" ? Optimizer::PlainGradient
                           : train_opt == "momentum"     ? Optimizer::Momentum
                                                         : Optimizer::AdaptiveMoment;
            Aggregation agg =
                train_agg == "normalized-sum" ? Aggregation::NormalizedSum : Aggregation::Sum;
            MpnnParams init = algorithmic_init(uniform_discretization(train_k), train_c,
                                               train_set.front().n, train_hidden, train_layers, agg);
            TrainResult res = train(init, train_set, val_set, tc);
            save_params(res.params, train_out);
            write_json(json{{"out", train_out},
                            {"epochs_run", res.epochs_run},
                            {"best_val", res.best_val},
                            {"train_curve", res.train_curve},
                            {"val_curve", res.val_curve}},
                       "-");
        } else if (*eval_cmd) {
            UniflInstance inst = load_instance(eval_in);
            std::ifstream pin(eval_probs);
            if (!pin) throw IoError("cannot open " + eval_probs);
            json pj = json::parse(pin);
            OpeningProbabilities probs;
            probs.p = pj.get<std::vector<double>>();
            ConnectionMetric metric = eval_metric == "squared" ? ConnectionMetric::Squared
                                                               : ConnectionMetric::Linear;
            ExpectedCostBreakdown b = expected_cost(inst, probs, metric);
            write_json(json{{"open_direct", b.open_direct},
                            {"open_forced", b.open_forced},
                            {"connection", b.connection},
                            {"total", b.total}},
                       eval_out);
        } else if (*exact_cmd) {
            UniflInstance inst = load_instance(exact_in);
            double t0 = now_ms();
            ExactResult res = exact_opt(inst);
            write_json(json{{"instance_id", inst.id},
                            {"opt_value", res.opt_value},
                            {"opt_facilities", res.opt_facilities},
                            {"explored", res.explored},
                            {"wall_time_ms", now_ms() - t0}},
                       exact_out);
        } else if (*tune) {
            auto insts = load_dir(fs::path(tune_data) / "train");
            if (insts.empty()) insts = load_dir(tune_data);
            Algo algo = tune_algo == "recursive" ? Algo::Recursive : Algo::Simple;
            auto grid = log_spaced_grid(grid_lo, grid_hi, grid_n);
            double best = grid_search_c(insts, algo, grid, tune_samples, tune_seed);
            write_json(json{{"algo", tune_algo}, {"best_c", best},
                            {"grid", {{"lo", grid_lo}, {"hi", grid_hi}, {"n", grid_n}}},
                            {"samples", tune_samples}, {"seed", tune_seed}},
                       tune_out);
        } else if (*ilp) {
            UniflInstance inst = load_instance(ilp_in);
            export_ilp(inst, ilp_out);
            std::cout << json{{"out", ilp_out}, {"n", inst.n}}.dump(2) << std::endl;
        } else if (*bench) {
            auto train_set = load_dir(fs::path(bench_dir) / "train");
            auto val_set = load_dir(fs::path(bench_dir) / "val");
            auto test_set = load_dir(fs::path(bench_dir) / "test");
            if (train_set.empty() || test_set.empty())
                throw Error("bench needs train/ and test/ under " + bench_dir);
            auto grid = log_spaced_grid(0.001, 10.0, bench_grid_n);

            double c_simple = grid_search_c(train_set, Algo::Simple, grid, 64, bench_seed);
            double c_rec = grid_search_c(train_set, Algo::Recursive, grid, 16, bench_seed);

            TrainConfig btc;
            btc.steps = bench_steps;
            btc.seed = bench_seed;
            MpnnParams init = algorithmic_init(uniform_discretization(32), c_simple,
                                               train_set.front().n);
            TrainResult trained = train(init, train_set, val_set, btc);

            json rows = json::array();
            auto add_row = [&](const std::string& name, auto&& stats_fn) {
                int m = static_cast<int>(test_set.size());
                std::vector<SolveStats> per(m);
                std::vector<double> refs(m);
                double t0 = now_ms();
                parallel_for(m, [&](int i) {
                    per[i] = stats_fn(test_set[i]);
                    refs[i] = reference_value(test_set[i]).first;
                });
                double open = 0, con = 0, total = 0, ratio = 0;
                for (int i = 0; i < m; ++i) {
                    open += per[i].open;
                    con += per[i].con;
                    total += per[i].total;
                    ratio += per[i].total / refs[i];
                }
                rows.push_back({{"candidate", name}, {"open", open / m}, {"con", con / m},
                                {"total", total / m}, {"ratio", ratio / m},
                                {"timing_ms", (now_ms() - t0) / m}});
            };
            add_row("SimpleUniformFL", [&](const UniflInstance& inst) {
                RadiusTable r = compute_radii(inst);
                return average_samples(inst, probs_simple(inst, r, c_simple), bench_samples,
                                       bench_seed);
            });
            add_row("RecursiveUFL", [&](const UniflInstance& inst) {
                RadiusTable r = compute_radii(inst);
                return average_recursion(inst, r, c_rec, std::max(1, bench_samples / 10),
                                         bench_seed, {});
            });
            add_row("MPNN", [&](const UniflInstance& inst) {
                return average_samples(inst, forward(trained.params, inst), bench_samples,
                                       bench_seed);
            });
            json out{{"dir", bench_dir},
                     {"tuned", {{"simple_c", c_simple}, {"recursive_c", c_rec}}},
                     {"rows", rows},
                     {"seed", bench_seed}};
            write_json(out, bench_out);
            if (!bench_csv.empty()) {
                std::ofstream csv(bench_csv);
                csv << "candidate,open,con,total,ratio,timing_ms\n";
                for (const auto& r : rows)
                    csv << r["candidate"].get<std::string>() << "," << r["open"] << ","
                        << r["con"] << "," << r["total"] << "," << r["ratio"] << ","
                        << r["timing_ms"] << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
