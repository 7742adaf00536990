#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "cofipara/common.hpp"

namespace cofipara::ad {

using Mat = Eigen::MatrixXd;

// One trainable (or frozen) tensor. Gradients accumulate across a batch and
// are cleared by the optimizer step. Adam state lives here so a checkpoint
// reload starts from clean optimizer moments.
struct Parameter {
    std::string name;
    std::string module_tag;  // text_encoder | image_encoder | fusion | text_decoder | image_decoder | heads
    bool trainable = true;
    Mat value;
    Mat grad;
    Mat adam_m;
    Mat adam_v;

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

struct Value {
    int id = -1;
    bool valid() const { return id >= 0; }
};

// Reverse-mode tape over dense double matrices. A Graph is built per forward
// pass; backward() walks nodes in reverse creation order and accumulates
// leaf gradients into their bound Parameters.
class Graph {
public:
    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    Value constant(Mat m);
    // Leaf bound to a parameter; frozen parameters enter as plain constants so
    // no gradient is ever produced for them.
    Value leaf(Parameter& p);

    const Mat& val(Value v) const { return nodes_[check(v)].val; }
    const Mat& grad(Value v) const { return nodes_[check(v)].grad; }

    Value matmul(Value a, Value b);      // A * B
    Value matmul_nt(Value a, Value b);   // A * B^T
    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value hadamard(Value a, Value b);
    Value ediv(Value a, Value b);
    Value emax(Value a, Value b);
    Value emin(Value a, Value b);
    Value eabs(Value a);
    Value scale(Value a, double s);
    Value shift(Value a, double s);
    Value add_rowvec(Value a, Value bias);  // bias is 1 x cols, broadcast over rows
    Value softmax_rows(Value a);
    Value log_softmax_rows(Value a);
    Value gelu(Value a);
    Value sigmoid(Value a);
    Value log_(Value a);
    Value layer_norm_rows(Value x, Value gamma, Value beta, double eps = 1e-5);
    Value gather_rows(Value x, std::vector<int> rows);
    Value slice_cols(Value x, int begin, int count);
    Value hconcat(const std::vector<Value>& parts);
    Value select_entries(Value x, std::vector<std::pair<int, int>> idx);  // k x 1
    Value mean_all(Value x);
    Value sum_all(Value x);

    // root must be 1x1; accumulates into bound Parameters' grad.
    void backward(Value root);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        Mat val;
        Mat grad;
        bool requires_grad = false;
        std::function<void(Graph&)> back;
        Parameter* param = nullptr;
    };

    int check(Value v) const {
        if (!v.valid() || v.id >= static_cast<int>(nodes_.size()))
            throw ContractViolation("autodiff: invalid value handle");
        return v.id;
    }
    Value make(Mat val, bool requires_grad, std::function<void(Graph&)> back);
    Mat& grad_buf(int id);
    bool needs(Value v) const { return nodes_[v.id].requires_grad; }
    void accumulate(int id, const Mat& g);

    std::vector<Node> nodes_;
};

// Tanh-approximation GELU and its derivative (smooth everywhere, which keeps
// finite-difference checks clean).
double gelu_scalar(double x);
double gelu_grad_scalar(double x);

}  // namespace cofipara::ad
