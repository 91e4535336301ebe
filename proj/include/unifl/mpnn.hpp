#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "unifl/expectation.hpp"
#include "unifl/instance.hpp"
#include "unifl/sampling.hpp"

namespace unifl {

// Bin boundaries 0 = a_0 < a_1 < ... < a_k = 1 used to bracket the radius.
struct Discretization {
    int k = 32;
    std::vector<double> a;
    double delta = 0.0;
};

Discretization uniform_discretization(int k);

// Dense layer with gradient buffers. Row-major weights (out x in).
struct Dense {
    int in = 0, out = 0;
    std::vector<double> w, b;
    std::vector<double> gw, gb;

    static Dense zeros(int in, int out);
    void zero_grad();
};

// Two-layer net: ReLU hidden, linear scalar output.
struct Fnn {
    Dense l1, l2;

    static Fnn zeros(int in, int hidden);
    double eval(const double* in) const;
    // Accumulates parameter grads; adds input grads into gin when non-null.
    void backward(const double* in, double gout, double* gin);
    void zero_grad();
};

enum class Aggregation { Sum, NormalizedSum };

// Residual refinement round (optional stack beyond the base construction).
struct RefineBlock {
    Fnn msg;      // (a_i, d(x,y), r_prev[y]) -> message
    Fnn combine;  // (a_i, t_prev, t_cur) -> radius correction contribution
};

struct MpnnParams {
    Discretization disc;
    int hidden = 8;
    Aggregation aggregation = Aggregation::Sum;
    Fnn msg;      // (a_i, d(x,y)) -> message
    Fnn clip;     // aggregate -> t, realizes min(1, .) at init
    Fnn combine;  // (a_i, t_prev, t_cur) -> radius estimate contribution
    Fnn head;     // (ln(n)*r, r, ln(n)) -> opening probability, hard-clipped
    std::vector<RefineBlock> refine;

    int layers() const { return 1 + static_cast<int>(refine.size()); }
    void zero_grad();
};

// Parameters that compute exactly the bin-bracketed radius estimate and
// p = min(1, c*ln(n)*r_hat); |p_x - min(1, c*ln(n)*r_x)| <= c*ln(n)*delta.
MpnnParams algorithmic_init(const Discretization& disc, double c, int n_hint, int hidden = 8,
                            int layers = 1, Aggregation aggregation = Aggregation::Sum);

// Intermediate activations retained for the backward pass.
struct ForwardTape {
    int n = 0, k = 0, layers = 0;
    // [layer][vertex][bin 0..k]
    std::vector<std::vector<std::vector<double>>> aggregate;
    std::vector<std::vector<std::vector<double>>> t;
    std::vector<std::vector<double>> r_hat;  // per layer
    std::vector<double> p_pre;
};

OpeningProbabilities forward(const MpnnParams& params, const UniflInstance& instance,
                             ForwardTape* tape = nullptr);

// Reverse-mode through the full graph; accumulates into the params' gradient
// buffers. The tape must come from forward(params, instance).
void backward(MpnnParams& params, const UniflInstance& instance, const ForwardTape& tape,
              const std::vector<double>& dE_dp);

enum class Optimizer { PlainGradient, Momentum, AdaptiveMoment };

struct TrainConfig {
    double lr = 1e-3;
    int steps = 1000;  // epochs
    int batch_size = 8;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::AdaptiveMoment;
    int early_stop_patience = 100;
    ConnectionMetric metric = ConnectionMetric::Linear;
};

struct TrainResult {
    MpnnParams params;  // best-validation checkpoint
    std::vector<double> train_curve;
    std::vector<double> val_curve;
    double best_val = 0.0;
    int epochs_run = 0;
};

TrainResult train(const MpnnParams& init, const std::vector<UniflInstance>& train_instances,
                  const std::vector<UniflInstance>& val_instances, const TrainConfig& cfg);

struct TransferRow {
    std::string instance_id;
    int n = 0;
    double expected_total = 0.0;
    double greedy_total = 0.0;
    double exact_opt = -1.0;  // < 0 when beyond the exhaustive limit
    double ratio_vs_greedy = 0.0;
};

struct TransferReport {
    std::vector<TransferRow> rows;
    double mean_ratio_vs_greedy = 0.0;
};

// Evaluates a trained model on (typically larger) instances without retraining.
TransferReport size_transfer_eval(const MpnnParams& params,
                                  const std::vector<UniflInstance>& instances);

void save_params(const MpnnParams& params, const std::string& path);
MpnnParams load_params(const std::string& path);

}  // namespace unifl
