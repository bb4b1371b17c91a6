#pragma once

#include <random>
#include <stdexcept>
#include <vector>

#include "meshdqn/state.hpp"

namespace meshdqn {

struct Transition {
    StateGraph state;
    int action = 0;
    StateGraph next_state;  // ignored when terminal
    double reward = 0.0;
    bool terminal = false;
};

/// Fixed-capacity ring buffer with uniform sampling.
class ReplayBuffer {
  public:
    explicit ReplayBuffer(size_t capacity = 50000) : capacity_(capacity) {
        if (capacity_ == 0) throw std::invalid_argument("replay: zero capacity");
    }

    void push(Transition t) {
        if (data_.size() < capacity_) {
            data_.push_back(std::move(t));
        } else {
            data_[next_] = std::move(t);
        }
        next_ = (next_ + 1) % capacity_;
        ++total_pushed_;
    }

    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    long long total_pushed() const { return total_pushed_; }
    const Transition& at(size_t i) const { return data_.at(i); }

    /// batch_size independent uniform draws (with replacement).
    std::vector<const Transition*> sample(size_t batch_size, std::mt19937_64& rng) const {
        if (data_.size() < batch_size)
            throw std::logic_error("replay: fewer transitions than batch size");
        std::uniform_int_distribution<size_t> pick(0, data_.size() - 1);
        std::vector<const Transition*> out;
        out.reserve(batch_size);
        for (size_t i = 0; i < batch_size; ++i) out.push_back(&data_[pick(rng)]);
        return out;
    }

  private:
    size_t capacity_;
    size_t next_ = 0;
    long long total_pushed_ = 0;
    std::vector<Transition> data_;
};

}  // namespace meshdqn
