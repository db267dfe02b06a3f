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

#include "driftbench/numkit/cmaes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "driftbench/errors.hpp"

namespace driftbench {

std::size_t default_population(std::size_t dimension) {
    return 4 + static_cast<std::size_t>(std::floor(3.0 * std::log(static_cast<double>(dimension))));
}

std::size_t CmaesConfig::resolved_population() const {
    return population == 0 ? default_population(dimension) : population;
}

void CmaesConfig::validate() const {
    if (dimension == 0) throw UsageError("cmaes: dimension must be positive");
    if (resolved_population() < 2) throw UsageError("cmaes: population must be >= 2");
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw UsageError("cmaes: sigma0 must be > 0");
}

struct Cmaes::State {
    std::size_t n;
    std::size_t lambda;
    std::size_t mu;
    Eigen::VectorXd weights;
    double mu_eff;
    double c_sigma, d_sigma, c_c, c_1, c_mu, chi_n;

    Eigen::VectorXd mean;
    double sigma;
    Eigen::MatrixXd cov;
    Eigen::MatrixXd basis;  // eigenvectors of cov
    Eigen::VectorXd scales; // sqrt of eigenvalues
    Eigen::VectorXd p_sigma;
    Eigen::VectorXd p_c;
    std::size_t generation = 0;
    Rng rng;
    Vec mean_cache;

    State(const CmaesConfig& cfg, std::span<const double> x0) : rng(cfg.seed) {
        n = x0.size();
        lambda = cfg.resolved_population();
        mu = lambda / 2;
        weights.resize(static_cast<Eigen::Index>(mu));
        for (std::size_t i = 0; i < mu; ++i) {
            weights(static_cast<Eigen::Index>(i)) =
                std::log(static_cast<double>(mu) + 0.5) - std::log(static_cast<double>(i + 1));
        }
        weights /= weights.sum();
        mu_eff = 1.0 / weights.squaredNorm();

        const double dn = static_cast<double>(n);
        c_sigma = (mu_eff + 2.0) / (dn + mu_eff + 5.0);
        d_sigma = 1.0 + 2.0 * std::max(0.0, std::sqrt((mu_eff - 1.0) / (dn + 1.0)) - 1.0) + c_sigma;
        c_c = (4.0 + mu_eff / dn) / (dn + 4.0 + 2.0 * mu_eff / dn);
        c_1 = 2.0 / ((dn + 1.3) * (dn + 1.3) + mu_eff);
        c_mu = std::min(1.0 - c_1,
                        2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((dn + 2.0) * (dn + 2.0) + mu_eff));
        chi_n = std::sqrt(dn) * (1.0 - 1.0 / (4.0 * dn) + 1.0 / (21.0 * dn * dn));

        mean = Eigen::Map<const Eigen::VectorXd>(x0.data(), static_cast<Eigen::Index>(n));
        sigma = cfg.sigma0;
        cov = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        basis = cov;
        scales = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
        p_sigma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        p_c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        mean_cache.assign(x0.begin(), x0.end());
    }

    void Decompose() {
        // Enforce symmetry before the eigen solve; rounding breaks it slowly.
        cov = 0.5 * (cov + cov.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
        basis = solver.eigenvectors();
        scales = solver.eigenvalues().cwiseMax(1e-300).cwiseSqrt();
    }
};

Cmaes::Cmaes(const CmaesConfig& config, std::span<const double> x0) {
    CmaesConfig cfg = config;
    cfg.dimension = x0.size();
    cfg.validate();
    if (!all_finite(x0)) throw NumericError("cmaes: non-finite start point");
    state_ = std::make_unique<State>(cfg, x0);
}

Cmaes::~Cmaes() = default;
Cmaes::Cmaes(const Cmaes& other) : state_(std::make_unique<State>(*other.state_)) {}
Cmaes& Cmaes::operator=(const Cmaes& other) {
    if (this != &other) state_ = std::make_unique<State>(*other.state_);
    return *this;
}
Cmaes::Cmaes(Cmaes&&) noexcept = default;
Cmaes& Cmaes::operator=(Cmaes&&) noexcept = default;

std::size_t Cmaes::dimension() const noexcept { return state_->n; }
std::size_t Cmaes::population() const noexcept { return state_->lambda; }
const Vec& Cmaes::mean() const noexcept { return state_->mean_cache; }
double Cmaes::sigma() const noexcept { return state_->sigma; }
std::size_t Cmaes::generation() const noexcept { return state_->generation; }

std::vector<Vec> Cmaes::ask() {
    State& s = *state_;
    const auto n = static_cast<Eigen::Index>(s.n);
    std::vector<Vec> out(s.lambda, Vec(s.n));
    Eigen::VectorXd z(n);
    for (auto& candidate : out) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = s.rng.normal();
        const Eigen::VectorXd x = s.mean + s.sigma * (s.basis * s.scales.cwiseProduct(z));
        for (Eigen::Index i = 0; i < n; ++i) candidate[static_cast<std::size_t>(i)] = x(i);
    }
    return out;
}

void Cmaes::tell(const std::vector<Vec>& candidates, std::span<const double> fitness) {
    State& s = *state_;
    if (candidates.size() != s.lambda || fitness.size() != s.lambda) {
        throw DataError("cmaes: tell() expects one fitness per candidate of the last ask()");
    }
    std::vector<double> f(fitness.begin(), fitness.end());
    bool any_finite = false;
    for (auto& v : f) {
        if (std::isfinite(v)) {
            any_finite = true;
        } else {
            v = std::numeric_limits<double>::infinity();
        }
    }
    if (!any_finite) throw NumericError("cmaes: every candidate in the generation is non-finite");

    std::vector<std::size_t> order(s.lambda);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });

    const auto n = static_cast<Eigen::Index>(s.n);
    const Eigen::VectorXd old_mean = s.mean;
    Eigen::MatrixXd steps(n, static_cast<Eigen::Index>(s.mu));
    Eigen::VectorXd new_mean = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < s.mu; ++i) {
        const Vec& x = candidates[order[i]];
        const Eigen::VectorXd xi = Eigen::Map<const Eigen::VectorXd>(x.data(), n);
        new_mean += s.weights(static_cast<Eigen::Index>(i)) * xi;
        steps.col(static_cast<Eigen::Index>(i)) = (xi - old_mean) / s.sigma;
    }
    const Eigen::VectorXd y_w = (new_mean - old_mean) / s.sigma;

    // C^{-1/2} y_w = B D^{-1} B^T y_w
    const Eigen::VectorXd c_inv_sqrt_y =
        s.basis * (s.basis.transpose() * y_w).cwiseQuotient(s.scales);
    s.p_sigma = (1.0 - s.c_sigma) * s.p_sigma +
                std::sqrt(s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff) * c_inv_sqrt_y;

    const double gen = static_cast<double>(s.generation + 1);
    const double ps_norm = s.p_sigma.norm();
    const double threshold =
        (1.4 + 2.0 / (static_cast<double>(s.n) + 1.0)) * s.chi_n *
        std::sqrt(1.0 - std::pow(1.0 - s.c_sigma, 2.0 * gen));
    const double h_sigma = ps_norm < threshold ? 1.0 : 0.0;

    s.p_c = (1.0 - s.c_c) * s.p_c + h_sigma * std::sqrt(s.c_c * (2.0 - s.c_c) * s.mu_eff) * y_w;

    Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < s.mu; ++i) {
        const auto col = steps.col(static_cast<Eigen::Index>(i));
        rank_mu += s.weights(static_cast<Eigen::Index>(i)) * (col * col.transpose());
    }
    const double delta_h = (1.0 - h_sigma) * s.c_c * (2.0 - s.c_c);
    s.cov = (1.0 - s.c_1 - s.c_mu) * s.cov +
            s.c_1 * (s.p_c * s.p_c.transpose() + delta_h * s.cov) + s.c_mu * rank_mu;

    s.sigma *= std::exp((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0));
    s.mean = new_mean;
    s.Decompose();
    ++s.generation;
    for (Eigen::Index i = 0; i < n; ++i) s.mean_cache[static_cast<std::size_t>(i)] = s.mean(i);
}

CmaesResult cmaes_minimize(const Fitness& fitness, std::span<const double> x0, CmaesConfig config) {
    config.dimension = x0.size();
    config.validate();
    const std::size_t lambda = config.resolved_population();
    if (config.max_evaluations < lambda) {
        throw UsageError("cmaes: budget " + std::to_string(config.max_evaluations) +
                         " is below one generation of " + std::to_string(lambda));
    }
    Cmaes es(config, x0);
    CmaesResult result;
    result.best_fitness = std::numeric_limits<double>::infinity();
    std::vector<double> f(lambda);
    while (result.evaluations + lambda <= config.max_evaluations) {
        const auto candidates = es.ask();
        for (std::size_t i = 0; i < lambda; ++i) {
            const double v = fitness(candidates[i]);
            f[i] = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
            if (f[i] < result.best_fitness) {
                result.best_fitness = f[i];
                result.best_x = candidates[i];
            }
        }
        result.evaluations += lambda;
        es.tell(candidates, f);
        result.history.push_back(result.best_fitness);
    }
    return result;
}

}  // namespace driftbench
