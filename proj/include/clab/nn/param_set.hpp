// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_NN_PARAM_SET_HPP
#define CLAB_NN_PARAM_SET_HPP

#include "clab/nn/tensor.hpp"

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace clab::nn {

/// Named, insertion-ordered parameter tensors plus SGD momentum buffers and a
/// step counter. Iteration order is the insertion order, always.
class ParamSet {
public:
    void add(const std::string& name, Tensor t)
    {
        require<UsageError>(!index_.count(name), "duplicate parameter name: " + name);
        index_[name] = names_.size();
        names_.push_back(name);
        momentum_.push_back(Vec::Zero(t.numel()));
        values_.push_back(std::move(t));
    }

    bool has(const std::string& name) const { return index_.count(name) > 0; }

    Tensor& at(const std::string& name) { return values_[index_of(name)]; }
    const Tensor& at(const std::string& name) const { return values_[index_of(name)]; }

    Tensor& at(std::size_t i) { return values_[i]; }
    const Tensor& at(std::size_t i) const { return values_[i]; }

    Vec& momentum(const std::string& name) { return momentum_[index_of(name)]; }
    Vec& momentum(std::size_t i) { return momentum_[i]; }
    const Vec& momentum(std::size_t i) const { return momentum_[i]; }

    const std::vector<std::string>& names() const { return names_; }
    std::size_t size() const { return values_.size(); }

    std::uint64_t step() const { return step_; }
    void set_step(std::uint64_t s) { step_ = s; }
    void increment_step() { ++step_; }

    /// Drops all gradient buffers (the "caller clears" step after an update).
    void zero_grads()
    {
        for (auto& t : values_) t.clear_grad();
    }

    /// Allocates zero grads where missing, so unreachable parameters read as zero.
    void ensure_zero_grads()
    {
        for (auto& t : values_) t.ensure_grad();
    }

    bool any_grad_populated() const
    {
        for (const auto& t : values_)
            if (t.has_grad()) return true;
        return false;
    }

private:
    std::size_t index_of(const std::string& name) const
    {
        auto it = index_.find(name);
        require<UsageError>(it != index_.end(), "unknown parameter: " + name);
        return it->second;
    }

    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Tensor> values_;
    std::vector<Vec> momentum_;
    std::uint64_t step_ = 0;
};

} // namespace clab::nn

#endif // CLAB_NN_PARAM_SET_HPP
