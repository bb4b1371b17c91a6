#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "meshdqn/tensor.hpp"

namespace meshdqn {

/// One-shot reverse-mode tape. Build a computation forward, call backward()
/// on a scalar root, read gradients by node id. Graph aggregation ops work
/// directly on edge lists so no dense n x n matrices are ever materialized.
/// Backward closures capture node ids and copied index arrays, never
/// references into the node vector (it grows while recording).
class Tape {
  public:
    using Id = int;

    Id leaf(Tensor value) { return push(std::move(value), {}); }

    const Tensor& value(Id id) const { return nodes_[id].value; }
    const Tensor& grad(Id id) const { return nodes_[id].grad; }

    /// C = A x B.
    Id matmul(Id a, Id b) {
        const Tensor& A = val(a);
        const Tensor& B = val(b);
        require(A.cols == B.rows, "matmul: inner dimensions differ");
        Tensor out(A.rows, B.cols);
        for (int i = 0; i < A.rows; ++i)
            for (int k = 0; k < A.cols; ++k) {
                const double aik = A.at(i, k);
                if (aik == 0.0) continue;
                for (int j = 0; j < B.cols; ++j) out.at(i, j) += aik * B.at(k, j);
            }
        const Id id = push(std::move(out), [a, b](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& A = t.val(a);
            const Tensor& B = t.val(b);
            Tensor& ga = t.nodes_[a].grad;
            Tensor& gb = t.nodes_[b].grad;
            for (int i = 0; i < A.rows; ++i)
                for (int j = 0; j < B.cols; ++j) {
                    const double gij = g.at(i, j);
                    if (gij == 0.0) continue;
                    for (int k = 0; k < A.cols; ++k) {
                        ga.at(i, k) += gij * B.at(k, j);
                        gb.at(k, j) += gij * A.at(i, k);
                    }
                }
        });
        return id;
    }

    Id add(Id a, Id b) {
        const Tensor& A = val(a);
        const Tensor& B = val(b);
        require(A.same_shape(B), "add: shape mismatch");
        Tensor out = A;
        for (size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
        return push(std::move(out), [a, b](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            for (size_t i = 0; i < g.size(); ++i) {
                t.nodes_[a].grad.data[i] += g.data[i];
                t.nodes_[b].grad.data[i] += g.data[i];
            }
        });
    }

    /// A (n x m) plus a 1 x m row vector broadcast down the rows.
    Id add_rowvec(Id a, Id bias) {
        const Tensor& A = val(a);
        const Tensor& B = val(bias);
        require(B.rows == 1 && B.cols == A.cols, "add_rowvec: bias must be 1 x cols");
        Tensor out = A;
        for (int r = 0; r < A.rows; ++r)
            for (int c = 0; c < A.cols; ++c) out.at(r, c) += B.at(0, c);
        return push(std::move(out), [a, bias](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            Tensor& gb = t.nodes_[bias].grad;
            for (int r = 0; r < g.rows; ++r)
                for (int c = 0; c < g.cols; ++c) {
                    ga.at(r, c) += g.at(r, c);
                    gb.at(0, c) += g.at(r, c);
                }
        });
    }

    Id relu(Id a) {
        Tensor out = val(a);
        for (double& v : out.data) v = std::max(v, 0.0);
        return push(std::move(out), [a](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& A = t.val(a);
            Tensor& ga = t.nodes_[a].grad;
            for (size_t i = 0; i < g.size(); ++i)
                if (A.data[i] > 0.0) ga.data[i] += g.data[i];
        });
    }

    Id tanh(Id a) {
        Tensor out = val(a);
        for (double& v : out.data) v = std::tanh(v);
        return push(std::move(out), [a](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& Y = t.nodes_[self].value;
            Tensor& ga = t.nodes_[a].grad;
            for (size_t i = 0; i < g.size(); ++i)
                ga.data[i] += g.data[i] * (1.0 - Y.data[i] * Y.data[i]);
        });
    }

    Id scalar_mul(Id a, double s) {
        Tensor out = val(a);
        for (double& v : out.data) v *= s;
        return push(std::move(out), [a, s](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            for (size_t i = 0; i < g.size(); ++i) ga.data[i] += s * g.data[i];
        });
    }

    /// out[r, c] = a[r, c] * gate[r, 0].
    Id rowwise_mul(Id a, Id gate) {
        const Tensor& A = val(a);
        const Tensor& G = val(gate);
        require(G.rows == A.rows && G.cols == 1, "rowwise_mul: gate must be rows x 1");
        Tensor out = A;
        for (int r = 0; r < A.rows; ++r)
            for (int c = 0; c < A.cols; ++c) out.at(r, c) *= G.at(r, 0);
        return push(std::move(out), [a, gate](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& A = t.val(a);
            const Tensor& G = t.val(gate);
            Tensor& ga = t.nodes_[a].grad;
            Tensor& gg = t.nodes_[gate].grad;
            for (int r = 0; r < g.rows; ++r)
                for (int c = 0; c < g.cols; ++c) {
                    ga.at(r, c) += g.at(r, c) * G.at(r, 0);
                    gg.at(r, 0) += g.at(r, c) * A.at(r, c);
                }
        });
    }

    /// out[i, :] = a[idx[i], :]; duplicate rows accumulate in backward.
    Id gather_rows(Id a, std::vector<int> idx) {
        const Tensor& A = val(a);
        Tensor out(static_cast<int>(idx.size()), A.cols);
        for (size_t i = 0; i < idx.size(); ++i) {
            require(idx[i] >= 0 && idx[i] < A.rows, "gather_rows: index out of range");
            for (int c = 0; c < A.cols; ++c) out.at(static_cast<int>(i), c) = A.at(idx[i], c);
        }
        return push(std::move(out), [a, idx = std::move(idx)](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            for (size_t i = 0; i < idx.size(); ++i)
                for (int c = 0; c < g.cols; ++c)
                    ga.at(idx[i], c) += g.at(static_cast<int>(i), c);
        });
    }

    /// out[i, :] = mean of a[j, :] over directed edges (j -> i); zero row for
    /// nodes without incoming edges.
    Id neighbor_mean(Id a, std::vector<std::pair<int, int>> edges) {
        const Tensor& A = val(a);
        std::vector<double> inv_deg(A.rows, 0.0);
        for (const auto& [src, dst] : edges) {
            require(src >= 0 && src < A.rows && dst >= 0 && dst < A.rows,
                    "neighbor_mean: edge endpoint out of range");
            inv_deg[dst] += 1.0;
        }
        for (double& d : inv_deg) d = d > 0.0 ? 1.0 / d : 0.0;
        Tensor out(A.rows, A.cols);
        for (const auto& [src, dst] : edges)
            for (int c = 0; c < A.cols; ++c) out.at(dst, c) += A.at(src, c) * inv_deg[dst];
        return push(std::move(out),
                    [a, edges = std::move(edges), inv_deg = std::move(inv_deg)](Tape& t, Id self) {
                        const Tensor& g = t.nodes_[self].grad;
                        Tensor& ga = t.nodes_[a].grad;
                        for (const auto& [src, dst] : edges)
                            for (int c = 0; c < g.cols; ++c)
                                ga.at(src, c) += g.at(dst, c) * inv_deg[dst];
                    });
    }

    /// Symmetric-normalized aggregation with self loops:
    /// out = D^{-1/2} (A + I) D^{-1/2} a, D = degree + 1; edge loops only.
    Id gcn_mix(Id a, std::vector<std::pair<int, int>> edges) {
        const Tensor& A = val(a);
        std::vector<double> inv_sqrt(A.rows, 0.0);
        {
            std::vector<double> deg(A.rows, 1.0);
            for (const auto& [src, dst] : edges) {
                require(src >= 0 && src < A.rows && dst >= 0 && dst < A.rows,
                        "gcn_mix: edge endpoint out of range");
                deg[dst] += 1.0;
            }
            for (int i = 0; i < A.rows; ++i) inv_sqrt[i] = 1.0 / std::sqrt(deg[i]);
        }
        Tensor out(A.rows, A.cols);
        for (int i = 0; i < A.rows; ++i) {
            const double w = inv_sqrt[i] * inv_sqrt[i];
            for (int c = 0; c < A.cols; ++c) out.at(i, c) = w * A.at(i, c);
        }
        for (const auto& [src, dst] : edges) {
            const double w = inv_sqrt[src] * inv_sqrt[dst];
            for (int c = 0; c < A.cols; ++c) out.at(dst, c) += w * A.at(src, c);
        }
        return push(std::move(out), [a, edges = std::move(edges),
                                     inv_sqrt = std::move(inv_sqrt)](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            for (int i = 0; i < g.rows; ++i) {
                const double w = inv_sqrt[i] * inv_sqrt[i];
                for (int c = 0; c < g.cols; ++c) ga.at(i, c) += w * g.at(i, c);
            }
            for (const auto& [src, dst] : edges) {
                const double w = inv_sqrt[src] * inv_sqrt[dst];
                for (int c = 0; c < g.cols; ++c) ga.at(src, c) += w * g.at(dst, c);
            }
        });
    }

    /// Per-segment mean over rows; segment[r] in [0, n_segments).
    Id segment_mean(Id a, std::vector<int> segment, int n_segments) {
        const Tensor& A = val(a);
        require(static_cast<int>(segment.size()) == A.rows, "segment_mean: label count");
        std::vector<double> inv_count(n_segments, 0.0);
        for (int s : segment) {
            require(s >= 0 && s < n_segments, "segment_mean: label out of range");
            inv_count[s] += 1.0;
        }
        for (double& c : inv_count) c = c > 0.0 ? 1.0 / c : 0.0;
        Tensor out(n_segments, A.cols);
        for (int r = 0; r < A.rows; ++r)
            for (int c = 0; c < A.cols; ++c)
                out.at(segment[r], c) += A.at(r, c) * inv_count[segment[r]];
        return push(std::move(out), [a, segment = std::move(segment),
                                     inv_count = std::move(inv_count)](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            for (int r = 0; r < ga.rows; ++r)
                for (int c = 0; c < g.cols; ++c)
                    ga.at(r, c) += g.at(segment[r], c) * inv_count[segment[r]];
        });
    }

    /// Per-segment max over rows; gradient flows to the first argmax row.
    Id segment_max(Id a, std::vector<int> segment, int n_segments) {
        const Tensor& A = val(a);
        require(static_cast<int>(segment.size()) == A.rows, "segment_max: label count");
        Tensor out(n_segments, A.cols);
        std::vector<int> argmax(static_cast<size_t>(n_segments) * A.cols, -1);
        for (int r = 0; r < A.rows; ++r) {
            const int s = segment[r];
            require(s >= 0 && s < n_segments, "segment_max: label out of range");
            for (int c = 0; c < A.cols; ++c) {
                int& am = argmax[static_cast<size_t>(s) * A.cols + c];
                if (am < 0 || A.at(r, c) > out.at(s, c)) {
                    out.at(s, c) = A.at(r, c);
                    am = r;
                }
            }
        }
        return push(std::move(out), [a, argmax = std::move(argmax)](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            for (int s = 0; s < g.rows; ++s)
                for (int c = 0; c < g.cols; ++c) {
                    const int r = argmax[static_cast<size_t>(s) * g.cols + c];
                    if (r >= 0) ga.at(r, c) += g.at(s, c);
                }
        });
    }

    /// out = [a | b] side by side.
    Id hconcat(Id a, Id b) {
        const Tensor& A = val(a);
        const Tensor& B = val(b);
        require(A.rows == B.rows, "hconcat: row mismatch");
        Tensor out(A.rows, A.cols + B.cols);
        for (int r = 0; r < A.rows; ++r) {
            for (int c = 0; c < A.cols; ++c) out.at(r, c) = A.at(r, c);
            for (int c = 0; c < B.cols; ++c) out.at(r, A.cols + c) = B.at(r, c);
        }
        return push(std::move(out), [a, b](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            Tensor& gb = t.nodes_[b].grad;
            for (int r = 0; r < g.rows; ++r) {
                for (int c = 0; c < ga.cols; ++c) ga.at(r, c) += g.at(r, c);
                for (int c = 0; c < gb.cols; ++c) gb.at(r, c) += g.at(r, ga.cols + c);
            }
        });
    }

    /// out = p / ||p||; p is a column vector.
    Id unit_vector(Id p) {
        const Tensor& P = val(p);
        require(P.cols == 1, "unit_vector: expects a column vector");
        double norm = 0.0;
        for (double v : P.data) norm += v * v;
        norm = std::sqrt(norm);
        require(norm > 0.0, "unit_vector: zero vector");
        Tensor out = P;
        for (double& v : out.data) v /= norm;
        return push(std::move(out), [p, norm](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            const Tensor& U = t.nodes_[self].value;
            Tensor& gp = t.nodes_[p].grad;
            double dot = 0.0;
            for (size_t i = 0; i < g.size(); ++i) dot += g.data[i] * U.data[i];
            for (size_t i = 0; i < g.size(); ++i)
                gp.data[i] += (g.data[i] - dot * U.data[i]) / norm;
        });
    }

    /// out[k, 0] = a[entries[k].first, entries[k].second].
    Id gather_entries(Id a, std::vector<std::pair<int, int>> entries) {
        const Tensor& A = val(a);
        Tensor out(static_cast<int>(entries.size()), 1);
        for (size_t k = 0; k < entries.size(); ++k) {
            const auto [r, c] = entries[k];
            require(r >= 0 && r < A.rows && c >= 0 && c < A.cols,
                    "gather_entries: index out of range");
            out.at(static_cast<int>(k), 0) = A.at(r, c);
        }
        return push(std::move(out), [a, entries = std::move(entries)](Tape& t, Id self) {
            const Tensor& g = t.nodes_[self].grad;
            Tensor& ga = t.nodes_[a].grad;
            for (size_t k = 0; k < entries.size(); ++k)
                ga.at(entries[k].first, entries[k].second) += g.at(static_cast<int>(k), 0);
        });
    }

    /// Mean Huber loss (delta = 1) between a column of predictions and fixed
    /// targets; returns a 1 x 1 scalar node.
    Id huber_loss(Id pred, std::vector<double> targets, double delta = 1.0) {
        const Tensor& P = val(pred);
        require(P.cols == 1 && P.rows == static_cast<int>(targets.size()),
                "huber_loss: prediction/target shape mismatch");
        const double inv_n = 1.0 / static_cast<double>(targets.size());
        Tensor out(1, 1);
        for (int r = 0; r < P.rows; ++r) {
            const double e = P.at(r, 0) - targets[r];
            out.at(0, 0) += (std::abs(e) <= delta ? 0.5 * e * e
                                                  : delta * (std::abs(e) - 0.5 * delta)) *
                            inv_n;
        }
        return push(std::move(out),
                    [pred, targets = std::move(targets), delta, inv_n](Tape& t, Id self) {
                        const double g = t.nodes_[self].grad.at(0, 0);
                        const Tensor& P = t.val(pred);
                        Tensor& gp = t.nodes_[pred].grad;
                        for (int r = 0; r < P.rows; ++r) {
                            const double e = P.at(r, 0) - targets[r];
                            gp.at(r, 0) += g * inv_n * std::clamp(e, -delta, delta);
                        }
                    });
    }

    /// Propagate d(root)/d(node) into every node's gradient slot.
    void backward(Id root) {
        require(val(root).rows == 1 && val(root).cols == 1, "backward: root must be scalar");
        for (Node& n : nodes_) {
            n.grad = Tensor(n.value.rows, n.value.cols);
        }
        nodes_[root].grad.at(0, 0) = 1.0;
        for (Id i = root; i >= 0; --i)
            if (nodes_[i].back) nodes_[i].back(*this, i);
        for (const Node& n : nodes_)
            if (!n.grad.all_finite()) throw std::runtime_error("backward: non-finite gradient");
    }

    int size() const { return static_cast<int>(nodes_.size()); }

  private:
    struct Node {
        Tensor value;
        Tensor grad;
        std::function<void(Tape&, Id)> back;
    };

    const Tensor& val(Id id) const { return nodes_[id].value; }

    static void require(bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    }

    Id push(Tensor value, std::function<void(Tape&, Id)> back) {
        nodes_.push_back(Node{std::move(value), Tensor(), std::move(back)});
        return static_cast<Id>(nodes_.size()) - 1;
    }

    std::vector<Node> nodes_;
};

}  // namespace meshdqn
