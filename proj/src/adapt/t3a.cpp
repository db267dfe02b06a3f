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

#include "driftbench/adapt/t3a.hpp"

#include <algorithm>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/kernels/kernels.hpp"
#include "driftbench/numkit/prob.hpp"

namespace driftbench {

SupportSet::SupportSet(std::size_t classes, std::size_t dim, std::size_t capacity)
    : dim_(dim), capacity_(capacity), lists_(classes) {
    if (capacity == 0) throw UsageError("t3a: support size must be >= 1");
}

SupportSet SupportSet::from_classifier(const HeadParams& params, std::size_t capacity) {
    SupportSet s(params.classes(), params.dim(), capacity);
    for (std::size_t c = 0; c < params.classes(); ++c) {
        const auto w = params.weight.row(c);
        Vec logits = matvec(params.weight, w);
        for (std::size_t k = 0; k < logits.size(); ++k) logits[k] += params.bias[k];
        s.add(c, Vec(w.begin(), w.end()), entropy_of_logits(logits));
    }
    return s;
}

void SupportSet::add(std::size_t cls, Vec embedding, double entropy) {
    if (cls >= lists_.size()) throw DataError("t3a: class index out of range");
    if (embedding.size() != dim_) throw DataError("t3a: support embedding dimension mismatch");
    lists_[cls].push_back(Entry{std::move(embedding), entropy});
    truncate(cls);
}

void SupportSet::truncate(std::size_t cls) {
    auto& list = lists_[cls];
    std::stable_sort(list.begin(), list.end(),
                     [](const Entry& a, const Entry& b) { return a.entropy < b.entropy; });
    if (list.size() > capacity_) list.resize(capacity_);
}

void SupportSet::update(const Matrix& embeddings, const Matrix& probs) {
    if (embeddings.rows() != probs.rows()) throw DataError("t3a: embeddings/probs row mismatch");
    if (probs.cols() != classes()) throw DataError("t3a: probs class count mismatch");
    for (std::size_t r = 0; r < probs.rows(); ++r) {
        const auto p = probs.row(r);
        const double h = entropy(p);
        const auto e = embeddings.row(r);
        lists_[argmax(p)].push_back(Entry{Vec(e.begin(), e.end()), h});
    }
    for (std::size_t c = 0; c < lists_.size(); ++c) truncate(c);
}

Matrix SupportSet::prototypes() const {
    Matrix mu(classes(), dim_, 0.0);
    const auto& k = kernels::active();
    for (std::size_t c = 0; c < classes(); ++c) {
        const auto& list = lists_[c];
        if (list.empty()) throw DataError("t3a: class " + std::to_string(c) + " has no support");
        for (const auto& e : list) k.axpy(1.0, e.embedding.data(), mu.row(c).data(), dim_);
        for (double& v : mu.row(c)) v /= static_cast<double>(list.size());
    }
    return mu;
}

Prediction t3a_classify(const SupportSet& support, const Matrix& embeddings) {
    if (embeddings.cols() != support.dim()) throw DataError("t3a: embedding dimension mismatch");
    const Matrix mu = support.prototypes();
    Matrix probs(embeddings.rows(), support.classes());
    for (std::size_t r = 0; r < embeddings.rows(); ++r) {
        const Vec p = softmax(matvec(mu, embeddings.row(r)));
        std::copy(p.begin(), p.end(), probs.row(r).begin());
    }
    return prediction_from_probs(std::move(probs));
}

}  // namespace driftbench
