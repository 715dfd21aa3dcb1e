#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace edgeserve::learn {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
struct Var {
    Tape* tape = nullptr;
    std::size_t id = 0;

    const Mat& value() const;
    const Mat& grad() const;
};

/// Reverse-mode recorder over dense matrices. Rows are batch entries and
/// columns are features throughout. Backward runs nodes in reverse creation
/// order, so accumulation order is fixed.
class Tape {
public:
    Var leaf(Mat value);      // differentiable input (parameter)
    Var constant(Mat value);  // no gradient

    const Mat& value(std::size_t id) const { return nodes_[id].value; }
    /// Gradient after backward(); zeros for nodes the root does not reach.
    const Mat& grad(std::size_t id) const;
    bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
    std::size_t size() const { return nodes_.size(); }

    /// Seeds d(root)/d(root) = 1 and propagates. Throws NumericError
    /// ("non-scalar root") unless the root is 1 x 1.
    void backward(Var root);

    // Used by op implementations.
    using Backward = std::function<void(Tape&, std::size_t self)>;
    Var push(Mat value, std::initializer_list<Var> parents, Backward back);
    void accumulate(std::size_t id, const Mat& g);
    const Mat& upstream(std::size_t id) const { return nodes_[id].grad; }

private:
    struct Node {
        Mat value;
        Mat grad;
        bool requires_grad = false;
        Backward back;
    };
    std::vector<Node> nodes_;
};

// Linear algebra
Var matmul(Var a, Var b);
Var add_bias(Var x, Var bias);  // bias is 1 x cols, broadcast over rows
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);

// Elementwise nonlinearities
Var tanh(Var a);
Var sigmoid(Var a);
Var softplus(Var a);
Var exp(Var a);
Var square(Var a);
Var clamp(Var a, double lo, double hi);
Var minimum(Var a, Var b);

// Reductions
Var sum(Var a);      // 1 x 1
Var mean(Var a);     // 1 x 1
Var row_sum(Var a);  // rows x 1

/// log Bernoulli(x | sigmoid(logits)) = x * l - softplus(l), elementwise;
/// x is a constant 0/1 matrix.
Var bernoulli_logprob(Var logits, const Mat& x);
/// log N(u | mu, exp(log_std)), elementwise; u constant, log_std 1 x cols.
Var normal_logprob(const Mat& u, Var mu, Var log_std);
/// Entropy of Bernoulli(sigmoid(l)) elementwise.
Var bernoulli_entropy(Var logits);

/// Head-wise linear map with a per-row weight offset:
/// out_r[h] = (W0[h] + dW_r[h]) x_r[h], where head h owns columns
/// [h*d, (h+1)*d) of x, W0 is d x (heads*d) with W0[h] its h-th d x d block
/// and dW is rows x (heads*d*d), row-major per head. dW is a constant, so
/// gradients reach W0 straight through the recurrent state.
Var ttt_apply(Var x, Var w0, const Mat& dw, std::size_t heads);

}  // namespace edgeserve::learn
