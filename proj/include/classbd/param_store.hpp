#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace classbd::ad {

/// One named trainable tensor: value, gradient-accumulation slot and the
/// optimizer's velocity slot, all the same shape.
struct Parameter {
    std::string name;
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::vector<double> velocity;

    std::size_t size() const { return value.size(); }
};

/// Flat registry of every trainable parameter in the model. Owns the
/// buffers; modules keep Parameter* handles from registration. Names are
/// unique and stable, which is what the checkpoint format serializes.
class ParameterStore {
public:
    Parameter& create(const std::string& name, std::vector<std::size_t> shape);
    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const;

    /// Registration order, which fixes every reduction/update order.
    std::vector<Parameter*> all();
    std::vector<const Parameter*> all() const;

    void zero_grads();
    std::size_t total_size() const;

private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::map<std::string, std::size_t> index_;
};

} // namespace classbd::ad
