#include "classbd/optim.hpp"

#include <algorithm>
#include <cmath>

#include "classbd/common.hpp"

namespace classbd::opt {

void SgdConfig::validate() const {
    require(learning_rate > 0.0, "SgdConfig: learning_rate must be positive");
    require(momentum >= 0.0 && momentum < 1.0, "SgdConfig: momentum must lie in [0,1)");
    require(batch_size > 0, "SgdConfig: batch_size must be positive");
    require(max_epochs > 0, "SgdConfig: max_epochs must be positive");
}

void CosineSchedule::validate() const {
    require(eta_max > 0.0, "CosineSchedule: eta_max must be positive");
    require(eta_min >= 0.0 && eta_min < eta_max,
            "CosineSchedule: eta_min must be non-negative and below eta_max");
    require(total_steps > 0, "CosineSchedule: total_steps must be positive");
}

double cosine_lr(const CosineSchedule& schedule, std::size_t step) {
    schedule.validate();
    require(step <= schedule.total_steps, "cosine_lr: step out of range");
    const double phase = kPi * static_cast<double>(step) / static_cast<double>(schedule.total_steps);
    return schedule.eta_min + 0.5 * (schedule.eta_max - schedule.eta_min) * (1.0 + std::cos(phase));
}

void sgd_step(ad::ParameterStore& store, const SgdConfig& cfg, double lr_now) {
    cfg.validate();
    require(lr_now >= 0.0, "sgd_step: learning rate must be non-negative");
    auto params = store.all();
    for (const auto* p : params) {
        for (std::size_t i = 0; i < p->grad.size(); ++i) {
            if (!std::isfinite(p->grad[i]))
                throw NumericalError("sgd_step: non-finite gradient in parameter " + p->name +
                                     " at index " + std::to_string(i));
        }
    }
    for (auto* p : params) {
        for (std::size_t i = 0; i < p->value.size(); ++i) {
            p->velocity[i] = cfg.momentum * p->velocity[i] + p->grad[i];
            p->value[i] -= lr_now * p->velocity[i];
            p->grad[i] = 0.0;
        }
    }
}

FiniteDifferenceReport finite_difference_check(ad::ParameterStore& store,
                                               const std::vector<ParamCoord>& coords,
                                               const std::function<double()>& loss_fn,
                                               double step_h, double tolerance) {
    require(step_h > 0.0, "finite_difference_check: step must be positive");
    FiniteDifferenceReport report;
    for (const auto& coord : coords) {
        ad::Parameter& p = store.at(coord.param);
        require(coord.index < p.size(), "finite_difference_check: index out of range for " + coord.param);

        FiniteDifferenceEntry entry;
        entry.param = coord.param;
        entry.index = coord.index;
        entry.analytic = p.grad[coord.index];

        const double saved = p.value[coord.index];
        p.value[coord.index] = saved + step_h;
        const double up = loss_fn();
        p.value[coord.index] = saved - step_h;
        const double down = loss_fn();
        p.value[coord.index] = saved;

        if (!std::isfinite(up) || !std::isfinite(down)) {
            entry.non_finite = true;
            entry.over_tolerance = true;
        } else {
            entry.numeric = (up - down) / (2.0 * step_h);
            const double denom = std::max({std::abs(entry.analytic), std::abs(entry.numeric), 1e-8});
            entry.rel_error = std::abs(entry.analytic - entry.numeric) / denom;
            entry.over_tolerance = entry.rel_error > tolerance;
            report.max_rel_error = std::max(report.max_rel_error, entry.rel_error);
        }
        if (entry.over_tolerance) ++report.flagged;
        report.entries.push_back(entry);
    }
    return report;
}

} // namespace classbd::opt
