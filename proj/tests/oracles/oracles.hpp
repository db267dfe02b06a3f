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

// Plain-loop reference computations used only by the tests. None of them call
// into the library numerics, so agreement is evidence rather than tautology.

#include <cstddef>
#include <functional>
#include <vector>

#include "driftbench/head/head_model.hpp"

namespace oracle {

using Rows = std::vector<std::vector<double>>;

Rows to_rows(const driftbench::Matrix& m);

// Logits of the head, recomputed with two-pass statistics and nested loops.
Rows head_logits(const driftbench::HeadParams& p, const driftbench::SourceStats& s, const Rows& x, bool batch_stats);

std::vector<double> softmax(const std::vector<double>& logits);
double entropy(const std::vector<double>& p);

// sum_j w_j H_j / #{w_j > 0}; empty weights means plain mean.
double entropy_loss(const driftbench::HeadParams& p, const driftbench::SourceStats& s, const Rows& x, bool batch_stats,
                    const std::vector<double>& weights);
// (1/sum w) sum_j w_j CE(target_j, p_j); empty weights means plain mean.
double crossentropy_loss(const driftbench::HeadParams& p, const driftbench::SourceStats& s, const Rows& x,
                         bool batch_stats, const Rows& targets, const std::vector<double>& weights);

// Central differences of `loss` for every scalar in the five tensors, flattened in
// the order norm_scale, norm_shift, weight (row-major), bias, prompt.
std::vector<std::vector<double>> central_differences(const driftbench::HeadParams& p,
                                                     const std::function<double(const driftbench::HeadParams&)>& loss,
                                                     double h);

std::vector<std::vector<double>> flatten(const driftbench::HeadParams& p);

// |a - n| / max(|a|, |n|, floor) per tensor, worst over tensors.
double worst_relative_error(const std::vector<std::vector<double>>& analytic,
                            const std::vector<std::vector<double>>& numeric, double floor);

struct Prf {
    double accuracy = 0.0;
    double macro_f1 = 0.0;
};

// Per-class counting of tp/fp/fn straight from the label vectors.
Prf brute_force_scores(const std::vector<int>& preds, const std::vector<int>& truth, int classes);

// sum_j sum_c [y log y - lambda y log p] - 1/2 sum_ij w_ij <y_i, y_j>
double lame_objective(const Rows& y, const Rows& p, const Rows& w, double lambda);

// Two samples, two classes: minimize the objective over y_j = (t_j, 1 - t_j)
// by a grid of the given step followed by a local refinement.
double lame_grid_minimum(const Rows& p, double w12, double lambda, double step);

// softmax(z . mean(support_c)) per class.
std::vector<double> t3a_probs(const std::vector<Rows>& support, const std::vector<double>& z);

}  // namespace oracle
