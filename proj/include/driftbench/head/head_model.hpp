// Copyright 2026 the driftbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "driftbench/numkit/matrix.hpp"

namespace driftbench {

inline constexpr double kNormEpsilon = 1e-5;

// Adaptable parameters of the classifier head:
//   z' = z + prompt
//   zhat = (z' - m) / sqrt(v + eps) * norm_scale + norm_shift
//   logits = weight * zhat + bias
struct HeadParams {
    Vec norm_scale;
    Vec norm_shift;
    Matrix weight;  // classes x dim
    Vec bias;
    Vec prompt;

    // Unit scale, zero shift/bias/prompt and an all-zero weight matrix.
    static HeadParams zeros_like(std::size_t dim, std::size_t classes);

    std::size_t dim() const noexcept { return norm_scale.size(); }
    std::size_t classes() const noexcept { return bias.size(); }

    // Throws DataError on inconsistent shapes, NumericError on non-finite values.
    void validate() const;

    bool operator==(const HeadParams&) const = default;
};

// Gradients share the parameter layout.
using HeadGrads = HeadParams;

enum class ParamGroup : unsigned {
    kNormScale = 1u << 0,
    kNormShift = 1u << 1,
    kWeight = 1u << 2,
    kBias = 1u << 3,
    kPrompt = 1u << 4,
};

// Which parameter tensors an optimizer or adapter may touch.
class ParamSet {
public:
    constexpr ParamSet() = default;
    constexpr explicit ParamSet(unsigned mask) : mask_(mask) {}
    constexpr ParamSet(std::initializer_list<ParamGroup> groups) {
        for (auto g : groups) mask_ |= static_cast<unsigned>(g);
    }
    constexpr bool contains(ParamGroup g) const { return (mask_ & static_cast<unsigned>(g)) != 0; }
    constexpr unsigned mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }

    static constexpr ParamSet norm_affine() { return {ParamGroup::kNormScale, ParamGroup::kNormShift}; }
    static constexpr ParamSet classifier() { return {ParamGroup::kWeight, ParamGroup::kBias}; }
    static constexpr ParamSet trainable() {
        return {ParamGroup::kNormScale, ParamGroup::kNormShift, ParamGroup::kWeight, ParamGroup::kBias};
    }

    // Comma-separated names: norm_scale,norm_shift,weight,bias,prompt (or "norm", "all").
    static ParamSet parse(std::string_view text);

    bool operator==(const ParamSet&) const = default;

private:
    unsigned mask_ = 0;
};

std::string_view param_group_name(ParamGroup g);

// Visits every tensor in declaration order: norm_scale, norm_shift, weight, bias, prompt.
void for_each_tensor(HeadParams& p, const std::function<void(ParamGroup, std::span<double>)>& fn);
void for_each_tensor(const HeadParams& p,
                     const std::function<void(ParamGroup, std::span<const double>)>& fn);

// Element-wise walk over two same-shaped parameter sets.
void zip_tensors(HeadParams& a, const HeadParams& b,
                 const std::function<void(ParamGroup, std::span<double>, std::span<const double>)>& fn);

// Frobenius norm over the selected groups (all groups when set is empty).
double params_norm(const HeadParams& p, ParamSet groups = ParamSet{});
double params_max_abs_difference(const HeadParams& a, const HeadParams& b);

// Per-dimension statistics of the source embeddings.
struct SourceStats {
    Vec feat_mean;
    Vec feat_std;
    Vec norm_running_mean;
    Vec norm_running_var;
    std::uint64_t count = 0;

    std::size_t dim() const noexcept { return feat_mean.size(); }
    void validate() const;
    bool operator==(const SourceStats&) const = default;
};

// Per-dimension mean and population standard deviation; needs >= 2 rows.
SourceStats compute_source_stats(const Matrix& embeddings);

// What an adapter is allowed to see: no labels, no groups.
struct UnlabeledBatch {
    Matrix embeddings;

    std::size_t size() const noexcept { return embeddings.rows(); }
};

struct FeatureBatch {
    Matrix embeddings;
    std::optional<std::vector<int>> labels;
    std::optional<std::vector<int>> group_ids;

    std::size_t size() const noexcept { return embeddings.rows(); }
    std::size_t dim() const noexcept { return embeddings.cols(); }

    // Throws DataError when empty, ragged, or labels fall outside [0, classes).
    void validate(std::size_t classes) const;
    UnlabeledBatch unlabeled() const { return UnlabeledBatch{embeddings}; }
};

enum class NormMode { kSourceStats, kBatchStats };

std::string_view norm_mode_name(NormMode mode);

struct ForwardCache {
    NormMode mode = NormMode::kSourceStats;
    Vec mean;       // statistics actually used
    Vec inv_std;    // 1/sqrt(v + eps), 0 where v + eps == 0
    Matrix standardized;  // (z' - m) * inv_std
    Matrix features;      // zhat, after the affine
};

struct ForwardResult {
    Matrix logits;
    Matrix probs;
    Matrix log_probs;
    ForwardCache cache;
};

ForwardResult forward(const HeadParams& params, const SourceStats& stats, const Matrix& embeddings,
                      NormMode mode);

// Backpropagates dL/dlogits into the selected parameter groups; unselected
// tensors come back zero. In batch-stats mode the prompt gradient is exactly
// zero because a common shift cancels against the batch mean.
HeadGrads backward_from_logits(const HeadParams& params, const ForwardResult& fwd,
                               const Matrix& grad_logits, ParamSet groups);

struct LossAndGrads {
    double loss = 0.0;
    HeadGrads grads;
    ForwardResult fwd;
};

// Mean per-row entropy of the predictions. With weights, the loss is
// sum_j w_j H_j / |{j : w_j > 0}|; rows with zero weight drop out.
LossAndGrads grad_entropy(const HeadParams& params, const SourceStats& stats,
                          const Matrix& embeddings, NormMode mode, ParamSet groups,
                          std::span<const double> weights = {});

// (1 / sum w) * sum_j w_j * (-sum_c target_jc log prob_jc). Empty weights means all ones.
LossAndGrads grad_crossentropy(const HeadParams& params, const SourceStats& stats,
                               const Matrix& embeddings, NormMode mode, const Matrix& targets,
                               ParamSet groups, std::span<const double> weights = {});

}  // namespace driftbench
