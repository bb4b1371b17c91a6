#pragma once

#include <vector>

#include "meshdqn/graph.hpp"

namespace meshdqn {

/// Agent-facing observation: the window of candidate vertices as a graph.
///
/// window[i] is the global mesh vertex behind node i, so action i removes
/// window[i] and the extra action index window.size() means 'no removal'.
/// offset counts stacked 'no removal' actions this episode; the window holds
/// distance ranks [offset, offset + N).
struct StateGraph {
    GraphBatch graph;
    std::vector<int> window;
    int offset = 0;

    int n_actions() const { return static_cast<int>(window.size()) + 1; }
};

}  // namespace meshdqn
