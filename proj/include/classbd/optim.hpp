#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "classbd/param_store.hpp"

namespace classbd::opt {

struct SgdConfig {
    double learning_rate = 0.1;
    double momentum = 0.9;
    std::size_t batch_size = 128;
    std::size_t max_epochs = 50;
    std::uint64_t seed = 0;

    void validate() const;
};

/// eta(t) = eta_min + (eta_max - eta_min) * (1 + cos(pi t / total_steps)) / 2.
struct CosineSchedule {
    double eta_max = 0.1;
    double eta_min = 0.0;
    std::size_t total_steps = 50;

    void validate() const;
};

double cosine_lr(const CosineSchedule& schedule, std::size_t step);

/// Momentum SGD over every parameter in the store:
///   v <- momentum * v + g;  theta <- theta - lr_now * v
/// Gradient slots are zeroed afterwards. A non-finite gradient aborts the
/// step with a diagnostic naming the parameter (no partial update).
void sgd_step(ad::ParameterStore& store, const SgdConfig& cfg, double lr_now);

struct FiniteDifferenceEntry {
    std::string param;
    std::size_t index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    double rel_error = 0.0;
    bool over_tolerance = false;
    bool non_finite = false; ///< probing produced a non-finite loss; flagged, not fatal
};

struct FiniteDifferenceReport {
    std::vector<FiniteDifferenceEntry> entries;
    double max_rel_error = 0.0;
    std::size_t flagged = 0;

    bool ok() const { return flagged == 0; }
};

/// A coordinate of one parameter tensor to probe.
struct ParamCoord {
    std::string param;
    std::size_t index = 0;
};

/// Central-difference check (L(th+h) - L(th-h)) / 2h against the analytic
/// gradients already sitting in the store's grad slots. `loss_fn` must
/// re-evaluate the loss from the store's current values; parameter values
/// are restored exactly after probing.
FiniteDifferenceReport finite_difference_check(ad::ParameterStore& store,
                                               const std::vector<ParamCoord>& coords,
                                               const std::function<double()>& loss_fn,
                                               double step_h, double tolerance = 1e-4);

} // namespace classbd::opt
