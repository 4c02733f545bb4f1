#include "classbd/param_store.hpp"

#include <algorithm>
#include <numeric>

#include "classbd/common.hpp"

namespace classbd::ad {

Parameter& ParameterStore::create(const std::string& name, std::vector<std::size_t> shape) {
    require(!name.empty(), "ParameterStore: empty parameter name");
    require(index_.find(name) == index_.end(), "ParameterStore: duplicate parameter name " + name);
    std::size_t n = 1;
    for (std::size_t d : shape) {
        require(d > 0, "ParameterStore: zero dimension in " + name);
        n *= d;
    }
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->shape = std::move(shape);
    p->value.assign(n, 0.0);
    p->grad.assign(n, 0.0);
    p->velocity.assign(n, 0.0);
    index_[name] = params_.size();
    params_.push_back(std::move(p));
    return *params_.back();
}

Parameter& ParameterStore::at(const std::string& name) {
    auto it = index_.find(name);
    require(it != index_.end(), "ParameterStore: unknown parameter " + name);
    return *params_[it->second];
}

const Parameter& ParameterStore::at(const std::string& name) const {
    auto it = index_.find(name);
    require(it != index_.end(), "ParameterStore: unknown parameter " + name);
    return *params_[it->second];
}

bool ParameterStore::contains(const std::string& name) const {
    return index_.find(name) != index_.end();
}

std::vector<Parameter*> ParameterStore::all() {
    std::vector<Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

std::vector<const Parameter*> ParameterStore::all() const {
    std::vector<const Parameter*> out;
    out.reserve(params_.size());
    for (auto& p : params_) out.push_back(p.get());
    return out;
}

void ParameterStore::zero_grads() {
    for (auto& p : params_) std::fill(p->grad.begin(), p->grad.end(), 0.0);
}

std::size_t ParameterStore::total_size() const {
    return std::accumulate(params_.begin(), params_.end(), std::size_t{0},
                           [](std::size_t acc, const auto& p) { return acc + p->size(); });
}

} // namespace classbd::ad
