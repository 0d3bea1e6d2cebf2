#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "gin/autograd.hpp"
#include "gin/tensor.hpp"

namespace gin {

enum class FlowMode { kGIN, kRNVP };

// How the zero-sum constraint interacts with clamping in GIN mode.
// kNegSumLast clamps the first m-1 components and sets the last to their
// exact negative sum, so each row sums to 0.0 bit-exactly. kZeroMean clamps
// all m components and subtracts the row mean.
enum class ScaleOrder { kNegSumLast, kZeroMean };

// kIdentityStart zeroes each subnet's final layer so every block starts as
// the identity; kRandom draws all layers, which is what the ground-truth
// mixer needs.
enum class InitScheme { kIdentityStart, kRandom };

struct FlowConfig {
    int dim = 10;
    int blocks = 8;
    std::vector<int> hidden = {10, 10};
    FlowMode mode = FlowMode::kGIN;
    ScaleOrder scale_order = ScaleOrder::kNegSumLast;
    InitScheme init = InitScheme::kIdentityStart;
    std::uint64_t seed = 0;
};

// Clamped scale vector: 2*tanh componentwise in RNVP mode; in GIN mode the
// rows are additionally constrained to sum to zero per ScaleOrder.
Tensor effective_scale(const Tensor& raw, FlowMode mode,
                       ScaleOrder order = ScaleOrder::kNegSumLast);

// Stack of coupling blocks with a fixed random permutation in front of each
// block and two coupling functions per block on alternating halves. The
// built direction maps data to latent; inverse() goes back.
class FlowModel {
public:
    explicit FlowModel(FlowConfig cfg);
    FlowModel(FlowConfig cfg, std::vector<std::vector<int>> perms,
              const std::vector<double>& flat_weights);

    int dim() const { return cfg_.dim; }
    int block_count() const { return cfg_.blocks; }
    FlowMode mode() const { return cfg_.mode; }
    const FlowConfig& config() const { return cfg_; }
    const std::vector<std::vector<int>>& permutations() const { return perms_; }

    // Plain evaluation. logdet, when requested, is the per-sample sum of
    // effective scales over all couplings (rank-1, length = batch).
    Tensor forward(const Tensor& x, Tensor* logdet = nullptr) const;
    Tensor inverse(const Tensor& y) const;

    // Graph-mode forward for training.
    Var build_forward(Graph& g, Var x) const;

    // One coupling function in isolation (no permutation); pos is 0 or 1
    // within the block. Returns (y, logdet).
    std::pair<Tensor, Tensor> coupling_forward(int block, int pos, const Tensor& x) const;

    ParamStore& params() { return params_; }
    const ParamStore& params() const { return params_; }
    std::vector<double> flat_weights() const;
    void set_flat_weights(const std::vector<double>& w);

private:
    struct Layer {
        int w = -1;
        int b = -1;
    };
    struct Coupling {
        int passive_lo = 0, passive_hi = 0;
        int active_lo = 0, active_hi = 0;
        std::vector<Layer> layers;
        std::vector<int> widths;  // input -> hidden... -> 2*active
    };
    struct Block {
        std::vector<int> perm;
        std::vector<int> inv_perm;
        Coupling c0, c1;
    };

    void build_structure();
    void init_weights();
    Coupling make_coupling(int block_index, int pos) const;
    Var build_scale(Graph& g, Var raw) const;
    Var build_coupling(Graph& g, Var x, const Coupling& c, Var* scale_out) const;
    Var build_forward_impl(Graph& g, Var x, std::vector<Var>* scales) const;
    Tensor subnet_eval(const Coupling& c, const Tensor& passive) const;
    Tensor uncouple(const Coupling& c, const Tensor& y) const;

    FlowConfig cfg_;
    ParamStore params_;
    std::vector<std::vector<int>> perms_;
    std::vector<Block> blocks_;
};

// Ground-truth nonlinear mixing: RNVP-mode flow with fully random weights.
FlowModel build_random_mixer(int dim, int n_blocks, std::uint64_t seed);

} // namespace gin
