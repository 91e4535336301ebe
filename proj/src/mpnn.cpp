#include "unifl/mpnn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>

#include <json.hpp>

#include "unifl/errors.hpp"
#include "unifl/oracle.hpp"
#include "unifl/rng.hpp"

namespace unifl {

namespace {
// Saturation-detector sharpness in the combine net. Must exceed the bin
// count so that at most the crossing bin can be partially activated.
constexpr double kSharpness = 4096.0;
}  // namespace

Discretization uniform_discretization(int k) {
    if (k < 1) throw InvariantViolation("bin count must be at least 1");
    Discretization d;
    d.k = k;
    d.a.resize(k + 1);
    for (int i = 0; i <= k; ++i) d.a[i] = static_cast<double>(i) / k;
    d.delta = 1.0 / k;
    return d;
}

Dense Dense::zeros(int in, int out) {
    Dense d;
    d.in = in;
    d.out = out;
    d.w.assign(static_cast<std::size_t>(in) * out, 0.0);
    d.b.assign(out, 0.0);
    d.gw.assign(d.w.size(), 0.0);
    d.gb.assign(d.b.size(), 0.0);
    return d;
}

void Dense::zero_grad() {
    std::fill(gw.begin(), gw.end(), 0.0);
    std::fill(gb.begin(), gb.end(), 0.0);
}

Fnn Fnn::zeros(int in, int hidden) {
    Fnn f;
    f.l1 = Dense::zeros(in, hidden);
    f.l2 = Dense::zeros(hidden, 1);
    return f;
}

double Fnn::eval(const double* in) const {
    double out = l2.b[0];
    for (int j = 0; j < l1.out; ++j) {
        double z = l1.b[j];
        for (int i = 0; i < l1.in; ++i) z += l1.w[static_cast<std::size_t>(j) * l1.in + i] * in[i];
        if (z > 0.0) out += l2.w[j] * z;
    }
    return out;
}

void Fnn::backward(const double* in, double gout, double* gin) {
    l2.gb[0] += gout;
    for (int j = 0; j < l1.out; ++j) {
        double z = l1.b[j];
        for (int i = 0; i < l1.in; ++i) z += l1.w[static_cast<std::size_t>(j) * l1.in + i] * in[i];
        double relu_z = z > 0.0 ? z : 0.0;
        l2.gw[j] += gout * relu_z;
        if (z > 0.0) {  // subgradient at 0 taken as 0
            double gz = gout * l2.w[j];
            l1.gb[j] += gz;
            for (int i = 0; i < l1.in; ++i) {
                l1.gw[static_cast<std::size_t>(j) * l1.in + i] += gz * in[i];
                if (gin) gin[i] += gz * l1.w[static_cast<std::size_t>(j) * l1.in + i];
            }
        }
    }
}

void Fnn::zero_grad() {
    l1.zero_grad();
    l2.zero_grad();
}

void MpnnParams::zero_grad() {
    msg.zero_grad();
    clip.zero_grad();
    combine.zero_grad();
    head.zero_grad();
    for (auto& blk : refine) {
        blk.msg.zero_grad();
        blk.combine.zero_grad();
    }
}

namespace {

// Fills inactive hidden units with small deterministic values so they can be
// recruited by training; their output weights stay zero, so the function
// computed at initialization is unchanged.
void seed_spare_units(Fnn& f, int first_spare, std::uint64_t key) {
    SplitMix64 rng(key);
    for (int j = first_spare; j < f.l1.out; ++j) {
        for (int i = 0; i < f.l1.in; ++i)
            f.l1.w[static_cast<std::size_t>(j) * f.l1.in + i] = 0.2 * (rng.next_uniform() - 0.5);
        f.l1.b[j] = 0.2 * (rng.next_uniform() - 0.5);
    }
}

void check_uniform(const Discretization& disc) {
    for (int i = 1; i <= disc.k; ++i)
        if (std::abs(disc.a[i] - disc.a[i - 1] - disc.delta) > 1e-12)
            throw InvariantViolation("algorithmic initialization requires uniform bins");
}

}  // namespace

MpnnParams algorithmic_init(const Discretization& disc, double c, int n_hint, int hidden,
                            int layers, Aggregation aggregation) {
    if (c <= 0.0) throw NonPositiveC();
    if (hidden < 1 || layers < 1) throw InvariantViolation("bad architecture sizes");
    check_uniform(disc);

    MpnnParams p;
    p.disc = disc;
    p.hidden = hidden;
    p.aggregation = aggregation;

    // msg(a, d) = relu(a - d)
    p.msg = Fnn::zeros(2, hidden);
    p.msg.l1.w[0] = 1.0;
    p.msg.l1.w[1] = -1.0;
    p.msg.l2.w[0] = 1.0;
    seed_spare_units(p.msg, 1, 11);

    // clip(s) = 1 - relu(1 - scale*s) = min(1, scale*s); scale compensates
    // the 1/n aggregation in normalized mode (exact for n = n_hint).
    const double scale = aggregation == Aggregation::NormalizedSum ? n_hint : 1.0;
    p.clip = Fnn::zeros(1, hidden);
    p.clip.l1.w[0] = -scale;
    p.clip.l1.b[0] = 1.0;
    p.clip.l2.w[0] = -1.0;
    p.clip.l2.b[0] = 1.0;
    seed_spare_units(p.clip, 1, 13);

    // combine(a, t_prev, t_cur) = delta - delta*relu(M*t_prev - (M-1)):
    // summing over bins telescopes the saturation point of t, so the sum is
    // the upper boundary of the bin containing the radius.
    p.combine = Fnn::zeros(3, hidden);
    p.combine.l1.w[1] = kSharpness;
    p.combine.l1.b[0] = -(kSharpness - 1.0);
    p.combine.l2.w[0] = -disc.delta;
    p.combine.l2.b[0] = disc.delta;
    seed_spare_units(p.combine, 1, 17);

    // head(u, r, lnn) with u = ln(n)*r: 1 - relu(1 - c*u) = min(1, c*ln(n)*r)
    p.head = Fnn::zeros(3, hidden);
    p.head.l1.w[0] = -c;
    p.head.l1.b[0] = 1.0;
    p.head.l2.w[0] = -1.0;
    p.head.l2.b[0] = 1.0;
    seed_spare_units(p.head, 1, 19);

    for (int l = 1; l < layers; ++l) {
        RefineBlock blk;
        blk.msg = Fnn::zeros(3, hidden);
        blk.combine = Fnn::zeros(3, hidden);
        // Zero output layers: residual corrections vanish at init.
        seed_spare_units(blk.msg, 0, 100 + 2 * l);
        seed_spare_units(blk.combine, 0, 101 + 2 * l);
        p.refine.push_back(std::move(blk));
    }
    return p;
}

OpeningProbabilities forward(const MpnnParams& params, const UniflInstance& inst,
                             ForwardTape* tape) {
    const int n = inst.n;
    const int k = params.disc.k;
    const int layers = params.layers();
    const double lnn = std::log(static_cast<double>(n));
    const double norm = params.aggregation == Aggregation::NormalizedSum ? 1.0 / n : 1.0;
    const auto& a = params.disc.a;

    ForwardTape local;
    ForwardTape& tp = tape ? *tape : local;
    tp.n = n;
    tp.k = k;
    tp.layers = layers;
    tp.aggregate.assign(layers, {});
    tp.t.assign(layers, {});
    tp.r_hat.assign(layers, std::vector<double>(n, 0.0));
    tp.p_pre.assign(n, 0.0);

    for (int l = 0; l < layers; ++l) {
        tp.aggregate[l].assign(n, std::vector<double>(k + 1, 0.0));
        tp.t[l].assign(n, std::vector<double>(k + 1, 0.0));
        const std::vector<double>* r_prev = l > 0 ? &tp.r_hat[l - 1] : nullptr;
        const Fnn& msg = l == 0 ? params.msg : params.refine[l - 1].msg;
        const Fnn& combine = l == 0 ? params.combine : params.refine[l - 1].combine;

        for (int x = 0; x < n; ++x) {
            for (int i = 0; i <= k; ++i) {
                double s = 0.0;
                for (const auto& nb : inst.adj[x]) {
                    double in[3] = {a[i], nb.dist, r_prev ? (*r_prev)[nb.id] : 0.0};
                    s += msg.eval(in);
                }
                s *= norm;
                tp.aggregate[l][x][i] = s;
                // Hard clamp to [0,1]: t is a truncated count (Eq. 3's min{1,.})
                // and the downstream saturation net amplifies any overshoot.
                tp.t[l][x][i] = std::clamp(params.clip.eval(&s), 0.0, 1.0);
            }
            double r = l > 0 ? (*r_prev)[x] : 0.0;
            for (int i = 1; i <= k; ++i) {
                double in[3] = {a[i], tp.t[l][x][i - 1], tp.t[l][x][i]};
                r += combine.eval(in);
            }
            tp.r_hat[l][x] = r;
        }
    }

    OpeningProbabilities probs;
    probs.source = ProbSource::Mpnn;
    probs.p.resize(n);
    for (int x = 0; x < n; ++x) {
        double r = tp.r_hat[layers - 1][x];
        double in[3] = {lnn * r, r, lnn};
        double pre = params.head.eval(in);
        if (!std::isfinite(pre)) throw NonFiniteActivation("head produced a non-finite value");
        tp.p_pre[x] = pre;
        probs.p[x] = std::clamp(pre, 0.0, 1.0);
    }
    return probs;
}

void backward(MpnnParams& params, const UniflInstance& inst, const ForwardTape& tp,
              const std::vector<double>& dE_dp) {
    const int n = inst.n;
    const int k = params.disc.k;
    const int layers = params.layers();
    if (tp.n != n || tp.k != k || tp.layers != layers)
        throw TapeMismatch("tape does not match params/instance");
    if (static_cast<int>(dE_dp.size()) != n) throw TapeMismatch("gradient size mismatch");
    const double lnn = std::log(static_cast<double>(n));
    const double norm = params.aggregation == Aggregation::NormalizedSum ? 1.0 / n : 1.0;
    const auto& a = params.disc.a;

    std::vector<double> g_r(n, 0.0);
    for (int x = 0; x < n; ++x) {
        double pre = tp.p_pre[x];
        double gp = (pre > 0.0 && pre < 1.0) ? dE_dp[x] : 0.0;  // hard clip
        if (gp == 0.0) continue;
        double r = tp.r_hat[layers - 1][x];
        double in[3] = {lnn * r, r, lnn};
        double gin[3] = {0.0, 0.0, 0.0};
        params.head.backward(in, gp, gin);
        g_r[x] += gin[0] * lnn + gin[1];
    }

    std::vector<double> g_t(k + 1), g_r_prev;
    for (int l = layers - 1; l >= 0; --l) {
        const std::vector<double>* r_prev = l > 0 ? &tp.r_hat[l - 1] : nullptr;
        Fnn& msg = l == 0 ? params.msg : params.refine[l - 1].msg;
        Fnn& combine = l == 0 ? params.combine : params.refine[l - 1].combine;
        g_r_prev.assign(n, 0.0);

        for (int x = 0; x < n; ++x) {
            double gr = g_r[x];
            if (l > 0) g_r_prev[x] += gr;  // residual connection
            std::fill(g_t.begin(), g_t.end(), 0.0);
            if (gr != 0.0) {
                for (int i = 1; i <= k; ++i) {
                    double in[3] = {a[i], tp.t[l][x][i - 1], tp.t[l][x][i]};
                    double gin[3] = {0.0, 0.0, 0.0};
                    combine.backward(in, gr, gin);
                    g_t[i - 1] += gin[1];
                    g_t[i] += gin[2];
                }
            }
            for (int i = 0; i <= k; ++i) {
                if (g_t[i] == 0.0) continue;
                double s = tp.aggregate[l][x][i];
                // Zero gradient where the [0,1] clamp on t is binding.
                double t_pre = params.clip.eval(&s);
                if (t_pre < 0.0 || t_pre > 1.0) continue;
                double gs = 0.0;
                params.clip.backward(&s, g_t[i], &gs);
                if (gs == 0.0) continue;
                double edge_g = gs * norm;
                for (const auto& nb : inst.adj[x]) {
                    double in[3] = {a[i], nb.dist, r_prev ? (*r_prev)[nb.id] : 0.0};
                    double gin[3] = {0.0, 0.0, 0.0};
                    msg.backward(in, edge_g, gin);
                    if (l > 0) g_r_prev[nb.id] += gin[2];
                }
            }
        }
        if (l > 0) g_r.swap(g_r_prev);
    }
}

namespace {

void visit_tensors(MpnnParams& p, const std::function<void(std::vector<double>&, std::vector<double>&)>& fn) {
    auto dense = [&](Dense& d) {
        fn(d.w, d.gw);
        fn(d.b, d.gb);
    };
    auto net = [&](Fnn& f) {
        dense(f.l1);
        dense(f.l2);
    };
    net(p.msg);
    net(p.clip);
    net(p.combine);
    net(p.head);
    for (auto& blk : p.refine) {
        net(blk.msg);
        net(blk.combine);
    }
}

double mean_expected_cost(const MpnnParams& params, const std::vector<UniflInstance>& insts,
                          ConnectionMetric metric) {
    double total = 0.0;
    for (const auto& inst : insts) {
        OpeningProbabilities probs = forward(params, inst);
        total += expected_cost(inst, probs, metric).total;
    }
    return total / insts.size();
}

}  // namespace

TrainResult train(const MpnnParams& init, const std::vector<UniflInstance>& train_instances,
                  const std::vector<UniflInstance>& val_instances, const TrainConfig& cfg) {
    if (train_instances.empty()) throw InvariantViolation("empty training set");
    if (cfg.lr <= 0.0 || cfg.steps < 0 || cfg.batch_size < 1)
        throw InvariantViolation("bad train config");
    const auto& val = val_instances.empty() ? train_instances : val_instances;

    TrainResult result;
    result.params = init;
    result.best_val = mean_expected_cost(init, val, cfg.metric);
    if (cfg.steps == 0) return result;

    MpnnParams params = init;

    // Flat optimizer state across all tensors.
    std::size_t dim = 0;
    visit_tensors(params, [&](std::vector<double>& w, std::vector<double>&) { dim += w.size(); });
    std::vector<double> m(dim, 0.0), v(dim, 0.0);
    int step_count = 0;

    std::vector<int> order(train_instances.size());
    std::iota(order.begin(), order.end(), 0);
    int patience_left = cfg.early_stop_patience;

    for (int epoch = 0; epoch < cfg.steps; ++epoch) {
        // Deterministic Fisher-Yates per (seed, epoch).
        SplitMix64 shuf(derive(cfg.seed, static_cast<std::uint64_t>(epoch)));
        for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
            int j = static_cast<int>(shuf.next() % static_cast<std::uint64_t>(i + 1));
            std::swap(order[i], order[j]);
        }

        double epoch_loss = 0.0;
        std::size_t pos = 0;
        while (pos < order.size()) {
            std::size_t batch_end = std::min(pos + cfg.batch_size, order.size());
            params.zero_grad();
            for (std::size_t bi = pos; bi < batch_end; ++bi) {
                const auto& inst = train_instances[order[bi]];
                ForwardTape tape;
                OpeningProbabilities probs = forward(params, inst, &tape);
                ExpectedCostBreakdown cost = expected_cost(inst, probs, cfg.metric);
                epoch_loss += cost.total;
                std::vector<double> dE_dp = expected_cost_grad(inst, probs, cfg.metric);
                backward(params, inst, tape, dE_dp);
            }
            double inv = 1.0 / static_cast<double>(batch_end - pos);
            ++step_count;
            std::size_t off = 0;
            visit_tensors(params, [&](std::vector<double>& w, std::vector<double>& g) {
                for (std::size_t i = 0; i < w.size(); ++i) {
                    double grad = g[i] * inv;
                    std::size_t fi = off + i;
                    switch (cfg.optimizer) {
                        case Optimizer::PlainGradient:
                            w[i] -= cfg.lr * grad;
                            break;
                        case Optimizer::Momentum:
                            m[fi] = 0.9 * m[fi] + grad;
                            w[i] -= cfg.lr * m[fi];
                            break;
                        case Optimizer::AdaptiveMoment: {
                            m[fi] = 0.9 * m[fi] + 0.1 * grad;
                            v[fi] = 0.999 * v[fi] + 0.001 * grad * grad;
                            double mh = m[fi] / (1.0 - std::pow(0.9, step_count));
                            double vh = v[fi] / (1.0 - std::pow(0.999, step_count));
                            w[i] -= cfg.lr * mh / (std::sqrt(vh) + 1e-8);
                            break;
                        }
                    }
                }
                off += w.size();
            });
            pos = batch_end;
        }
        epoch_loss /= static_cast<double>(train_instances.size());
        if (!std::isfinite(epoch_loss)) throw DivergedLoss("non-finite training loss");

        double val_loss = mean_expected_cost(params, val, cfg.metric);
        if (!std::isfinite(val_loss)) throw DivergedLoss("non-finite validation loss");
        result.train_curve.push_back(epoch_loss);
        result.val_curve.push_back(val_loss);
        result.epochs_run = epoch + 1;

        if (val_loss < result.best_val) {
            result.best_val = val_loss;
            result.params = params;
            patience_left = cfg.early_stop_patience;
        } else if (--patience_left <= 0) {
            break;
        }
    }
    return result;
}

TransferReport size_transfer_eval(const MpnnParams& params,
                                  const std::vector<UniflInstance>& instances) {
    TransferReport report;
    double ratio_sum = 0.0;
    for (const auto& inst : instances) {
        TransferRow row;
        row.instance_id = inst.id;
        row.n = inst.n;
        OpeningProbabilities probs = forward(params, inst);
        row.expected_total = expected_cost(inst, probs).total;
        Solution greedy = greedy_upper_bound(inst);
        row.greedy_total = greedy.total;
        if (inst.n <= kExhaustiveLimit) row.exact_opt = exact_opt(inst).opt_value;
        row.ratio_vs_greedy = row.expected_total / row.greedy_total;
        ratio_sum += row.ratio_vs_greedy;
        report.rows.push_back(std::move(row));
    }
    if (!report.rows.empty()) report.mean_ratio_vs_greedy = ratio_sum / report.rows.size();
    return report;
}

// ---- serialization -------------------------------------------------------

namespace {

using nlohmann::json;

json dense_to_json(const Dense& d) {
    return json{{"in", d.in}, {"out", d.out}, {"w", d.w}, {"b", d.b}};
}

Dense dense_from_json(const json& j) {
    Dense d = Dense::zeros(j.at("in").get<int>(), j.at("out").get<int>());
    d.w = j.at("w").get<std::vector<double>>();
    d.b = j.at("b").get<std::vector<double>>();
    if (d.w.size() != static_cast<std::size_t>(d.in) * d.out ||
        d.b.size() != static_cast<std::size_t>(d.out))
        throw ParseError(0, "tensor shape mismatch in params file");
    d.gw.assign(d.w.size(), 0.0);
    d.gb.assign(d.b.size(), 0.0);
    return d;
}

json fnn_to_json(const Fnn& f) { return json{{"l1", dense_to_json(f.l1)}, {"l2", dense_to_json(f.l2)}}; }

Fnn fnn_from_json(const json& j) {
    Fnn f;
    f.l1 = dense_from_json(j.at("l1"));
    f.l2 = dense_from_json(j.at("l2"));
    return f;
}

}  // namespace

void save_params(const MpnnParams& p, const std::string& path) {
    json j;
    j["format"] = "unifl-mpnn";
    j["version"] = 1;
    j["k"] = p.disc.k;
    j["bins"] = p.disc.a;
    j["hidden"] = p.hidden;
    j["aggregation"] = p.aggregation == Aggregation::Sum ? "sum" : "normalized-sum";
    j["msg"] = fnn_to_json(p.msg);
    j["clip"] = fnn_to_json(p.clip);
    j["combine"] = fnn_to_json(p.combine);
    j["head"] = fnn_to_json(p.head);
    j["refine"] = json::array();
    for (const auto& blk : p.refine)
        j["refine"].push_back({{"msg", fnn_to_json(blk.msg)}, {"combine", fnn_to_json(blk.combine)}});
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

MpnnParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json j = json::parse(in, nullptr, true);
    if (j.value("format", "") != "unifl-mpnn" || j.value("version", 0) != 1)
        throw ParseError(0, "not a unifl-mpnn v1 params file");
    MpnnParams p;
    p.disc.k = j.at("k").get<int>();
    p.disc.a = j.at("bins").get<std::vector<double>>();
    if (static_cast<int>(p.disc.a.size()) != p.disc.k + 1)
        throw ParseError(0, "bin vector size mismatch");
    p.disc.delta = 0.0;
    for (int i = 1; i <= p.disc.k; ++i)
        p.disc.delta = std::max(p.disc.delta, p.disc.a[i] - p.disc.a[i - 1]);
    p.hidden = j.at("hidden").get<int>();
    p.aggregation = j.at("aggregation").get<std::string>() == "normalized-sum"
                        ? Aggregation::NormalizedSum
                        : Aggregation::Sum;
    p.msg = fnn_from_json(j.at("msg"));
    p.clip = fnn_from_json(j.at("clip"));
    p.combine = fnn_from_json(j.at("combine"));
    p.head = fnn_from_json(j.at("head"));
    for (const auto& blk : j.at("refine")) {
        RefineBlock rb;
        rb.msg = fnn_from_json(blk.at("msg"));
        rb.combine = fnn_from_json(blk.at("combine"));
        p.refine.push_back(std::move(rb));
    }
    return p;
}

}  // namespace unifl
