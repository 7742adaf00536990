#include "cofipara/autodiff.hpp"

#include <cmath>

namespace cofipara::ad {

namespace {
constexpr double kGeluC = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluA = 0.044715;

void require_same_shape(const Mat& a, const Mat& b, const char* op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ContractViolation(std::string("autodiff: shape mismatch in ") + op);
}
}  // namespace

double gelu_scalar(double x) {
    double u = kGeluC * (x + kGeluA * x * x * x);
    return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad_scalar(double x) {
    double u = kGeluC * (x + kGeluA * x * x * x);
    double t = std::tanh(u);
    double sech2 = 1.0 - t * t;
    return 0.5 * (1.0 + t) + 0.5 * x * sech2 * kGeluC * (1.0 + 3.0 * kGeluA * x * x);
}

Value Graph::make(Mat val, bool requires_grad, std::function<void(Graph&)> back) {
    Node n;
    n.val = std::move(val);
    n.requires_grad = requires_grad;
    n.back = requires_grad ? std::move(back) : nullptr;
    nodes_.push_back(std::move(n));
    return Value{static_cast<int>(nodes_.size()) - 1};
}

Mat& Graph::grad_buf(int id) {
    Node& n = nodes_[id];
    if (n.grad.rows() != n.val.rows() || n.grad.cols() != n.val.cols())
        n.grad.setZero(n.val.rows(), n.val.cols());
    return n.grad;
}

void Graph::accumulate(int id, const Mat& g) {
    if (!nodes_[id].requires_grad) return;
    grad_buf(id) += g;
}

Value Graph::constant(Mat m) { return make(std::move(m), false, nullptr); }

Value Graph::leaf(Parameter& p) {
    if (!p.trainable) return constant(p.value);
    Value v = make(p.value, true, nullptr);
    nodes_[v.id].param = &p;
    return v;
}

Value Graph::matmul(Value a, Value b) {
    int ia = check(a), ib = check(b);
    const Mat& A = nodes_[ia].val;
    const Mat& B = nodes_[ib].val;
    if (A.cols() != B.rows()) throw ContractViolation("autodiff: inner dimension mismatch in matmul");
    bool rg = needs(a) || needs(b);
    Value v = make(A * B, rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            if (g.nodes_[ia].requires_grad) g.accumulate(ia, dC * g.nodes_[ib].val.transpose());
            if (g.nodes_[ib].requires_grad) g.accumulate(ib, g.nodes_[ia].val.transpose() * dC);
        };
    }
    return v;
}

Value Graph::matmul_nt(Value a, Value b) {
    int ia = check(a), ib = check(b);
    const Mat& A = nodes_[ia].val;
    const Mat& B = nodes_[ib].val;
    if (A.cols() != B.cols()) throw ContractViolation("autodiff: inner dimension mismatch in matmul_nt");
    bool rg = needs(a) || needs(b);
    Mat out = A * B.transpose();
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            if (g.nodes_[ia].requires_grad) g.accumulate(ia, dC * g.nodes_[ib].val);
            if (g.nodes_[ib].requires_grad) g.accumulate(ib, dC.transpose() * g.nodes_[ia].val);
        };
    }
    return v;
}

void Graph::backward(Value root) {
    int r = check(root);
    const Mat& rv = nodes_[r].val;
    if (rv.rows() != 1 || rv.cols() != 1)
        throw ContractViolation("autodiff: backward root must be a scalar");
    grad_buf(r).setConstant(1.0);
    for (int id = r; id >= 0; --id) {
        Node& n = nodes_[id];
        if (!n.requires_grad || !n.back) continue;
        if (n.grad.size() == 0) continue;  // never reached from the root
        n.back(*this);
    }
    for (auto& n : nodes_) {
        if (n.param && n.grad.size() != 0) {
            if (n.param->grad.size() == 0) n.param->zero_grad();
            n.param->grad += n.grad;
        }
    }
}

Value Graph::add(Value a, Value b) {
    int ia = check(a), ib = check(b);
    require_same_shape(nodes_[ia].val, nodes_[ib].val, "add");
    bool rg = needs(a) || needs(b);
    Value v = make(nodes_[ia].val + nodes_[ib].val, rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            g.accumulate(ia, dC);
            g.accumulate(ib, dC);
        };
    }
    return v;
}

Value Graph::sub(Value a, Value b) {
    int ia = check(a), ib = check(b);
    require_same_shape(nodes_[ia].val, nodes_[ib].val, "sub");
    bool rg = needs(a) || needs(b);
    Value v = make(nodes_[ia].val - nodes_[ib].val, rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            g.accumulate(ia, dC);
            g.accumulate(ib, -dC);
        };
    }
    return v;
}

Value Graph::hadamard(Value a, Value b) {
    int ia = check(a), ib = check(b);
    require_same_shape(nodes_[ia].val, nodes_[ib].val, "hadamard");
    bool rg = needs(a) || needs(b);
    Value v = make(nodes_[ia].val.cwiseProduct(nodes_[ib].val), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            if (g.nodes_[ia].requires_grad) g.accumulate(ia, dC.cwiseProduct(g.nodes_[ib].val));
            if (g.nodes_[ib].requires_grad) g.accumulate(ib, dC.cwiseProduct(g.nodes_[ia].val));
        };
    }
    return v;
}

Value Graph::ediv(Value a, Value b) {
    int ia = check(a), ib = check(b);
    require_same_shape(nodes_[ia].val, nodes_[ib].val, "ediv");
    bool rg = needs(a) || needs(b);
    Value v = make(nodes_[ia].val.cwiseQuotient(nodes_[ib].val), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            const Mat& B = g.nodes_[ib].val;
            if (g.nodes_[ia].requires_grad) g.accumulate(ia, dC.cwiseQuotient(B));
            if (g.nodes_[ib].requires_grad)
                g.accumulate(ib, -dC.cwiseProduct(g.nodes_[self].val).cwiseQuotient(B));
        };
    }
    return v;
}

Value Graph::emax(Value a, Value b) {
    int ia = check(a), ib = check(b);
    require_same_shape(nodes_[ia].val, nodes_[ib].val, "emax");
    bool rg = needs(a) || needs(b);
    Value v = make(nodes_[ia].val.cwiseMax(nodes_[ib].val), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            // ties route to the first argument
            Mat pick = (g.nodes_[ia].val.array() >= g.nodes_[ib].val.array()).cast<double>();
            if (g.nodes_[ia].requires_grad) g.accumulate(ia, dC.cwiseProduct(pick));
            if (g.nodes_[ib].requires_grad)
                g.accumulate(ib, dC.cwiseProduct(Mat(1.0 - pick.array())));
        };
    }
    return v;
}

Value Graph::emin(Value a, Value b) {
    int ia = check(a), ib = check(b);
    require_same_shape(nodes_[ia].val, nodes_[ib].val, "emin");
    bool rg = needs(a) || needs(b);
    Value v = make(nodes_[ia].val.cwiseMin(nodes_[ib].val), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            Mat pick = (g.nodes_[ia].val.array() <= g.nodes_[ib].val.array()).cast<double>();
            if (g.nodes_[ia].requires_grad) g.accumulate(ia, dC.cwiseProduct(pick));
            if (g.nodes_[ib].requires_grad)
                g.accumulate(ib, dC.cwiseProduct(Mat(1.0 - pick.array())));
        };
    }
    return v;
}

Value Graph::eabs(Value a) {
    int ia = check(a);
    bool rg = needs(a);
    Value v = make(nodes_[ia].val.cwiseAbs(), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            Mat sign = g.nodes_[ia].val.array().sign();
            g.accumulate(ia, dC.cwiseProduct(sign));
        };
    }
    return v;
}

Value Graph::scale(Value a, double s) {
    int ia = check(a);
    bool rg = needs(a);
    Value v = make(nodes_[ia].val * s, rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, s](Graph& g) { g.accumulate(ia, g.nodes_[self].grad * s); };
    }
    return v;
}

Value Graph::shift(Value a, double s) {
    int ia = check(a);
    bool rg = needs(a);
    Value v = make(Mat(nodes_[ia].val.array() + s), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia](Graph& g) { g.accumulate(ia, g.nodes_[self].grad); };
    }
    return v;
}

Value Graph::add_rowvec(Value a, Value bias) {
    int ia = check(a), ib = check(bias);
    const Mat& A = nodes_[ia].val;
    const Mat& B = nodes_[ib].val;
    if (B.rows() != 1 || B.cols() != A.cols())
        throw ContractViolation("autodiff: bias must be 1 x cols in add_rowvec");
    bool rg = needs(a) || needs(bias);
    Mat out = A.rowwise() + B.row(0);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia, ib](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            g.accumulate(ia, dC);
            if (g.nodes_[ib].requires_grad) g.accumulate(ib, dC.colwise().sum());
        };
    }
    return v;
}

Value Graph::softmax_rows(Value a) {
    int ia = check(a);
    const Mat& A = nodes_[ia].val;
    Mat out(A.rows(), A.cols());
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        double mx = A.row(r).maxCoeff();
        Eigen::ArrayXd e = (A.row(r).array() - mx).exp();
        out.row(r) = (e / e.sum()).matrix();
    }
    bool rg = needs(a);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia](Graph& g) {
            const Mat& dS = g.nodes_[self].grad;
            const Mat& S = g.nodes_[self].val;
            Mat dX(S.rows(), S.cols());
            for (Eigen::Index r = 0; r < S.rows(); ++r) {
                double dot = dS.row(r).cwiseProduct(S.row(r)).sum();
                dX.row(r) = S.row(r).cwiseProduct(Mat(dS.row(r).array() - dot));
            }
            g.accumulate(ia, dX);
        };
    }
    return v;
}

Value Graph::log_softmax_rows(Value a) {
    int ia = check(a);
    const Mat& A = nodes_[ia].val;
    Mat out(A.rows(), A.cols());
    for (Eigen::Index r = 0; r < A.rows(); ++r) {
        double mx = A.row(r).maxCoeff();
        Eigen::ArrayXd shifted = A.row(r).array() - mx;
        double lse = std::log(shifted.exp().sum());
        out.row(r) = (shifted - lse).matrix();
    }
    bool rg = needs(a);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia](Graph& g) {
            const Mat& dL = g.nodes_[self].grad;
            const Mat& L = g.nodes_[self].val;
            Mat dX(L.rows(), L.cols());
            for (Eigen::Index r = 0; r < L.rows(); ++r) {
                double rowsum = dL.row(r).sum();
                dX.row(r) = dL.row(r) - (L.row(r).array().exp() * rowsum).matrix();
            }
            g.accumulate(ia, dX);
        };
    }
    return v;
}

Value Graph::gelu(Value a) {
    int ia = check(a);
    bool rg = needs(a);
    Mat out = nodes_[ia].val.unaryExpr([](double x) { return gelu_scalar(x); });
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia](Graph& g) {
            Mat d = g.nodes_[ia].val.unaryExpr([](double x) { return gelu_grad_scalar(x); });
            g.accumulate(ia, g.nodes_[self].grad.cwiseProduct(d));
        };
    }
    return v;
}

Value Graph::sigmoid(Value a) {
    int ia = check(a);
    bool rg = needs(a);
    Mat out = nodes_[ia].val.unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia](Graph& g) {
            const Mat& S = g.nodes_[self].val;
            Mat d = S.cwiseProduct(Mat(1.0 - S.array()));
            g.accumulate(ia, g.nodes_[self].grad.cwiseProduct(d));
        };
    }
    return v;
}

Value Graph::log_(Value a) {
    int ia = check(a);
    bool rg = needs(a);
    Value v = make(Mat(nodes_[ia].val.array().log()), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ia](Graph& g) {
            g.accumulate(ia, g.nodes_[self].grad.cwiseQuotient(g.nodes_[ia].val));
        };
    }
    return v;
}

Value Graph::layer_norm_rows(Value x, Value gamma, Value beta, double eps) {
    int ix = check(x), ig = check(gamma), ib = check(beta);
    const Mat& X = nodes_[ix].val;
    const Eigen::Index d = X.cols();
    if (nodes_[ig].val.cols() != d || nodes_[ib].val.cols() != d)
        throw ContractViolation("autodiff: layer_norm parameter width mismatch");
    Mat xhat(X.rows(), d);
    Eigen::VectorXd inv_std(X.rows());
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        double mu = X.row(r).mean();
        double var = (X.row(r).array() - mu).square().mean();
        double is = 1.0 / std::sqrt(var + eps);
        inv_std(r) = is;
        xhat.row(r) = ((X.row(r).array() - mu) * is).matrix();
    }
    Mat out = xhat;
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        out.row(r) = out.row(r).cwiseProduct(nodes_[ig].val.row(0)) + nodes_[ib].val.row(0);
    bool rg = needs(x) || needs(gamma) || needs(beta);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        auto xhat_p = std::make_shared<Mat>(std::move(xhat));
        auto inv_p = std::make_shared<Eigen::VectorXd>(std::move(inv_std));
        nodes_[self].back = [self, ix, ig, ib, xhat_p, inv_p](Graph& g) {
            const Mat& dY = g.nodes_[self].grad;
            const Mat& G = g.nodes_[ig].val;
            if (g.nodes_[ig].requires_grad) g.accumulate(ig, dY.cwiseProduct(*xhat_p).colwise().sum());
            if (g.nodes_[ib].requires_grad) g.accumulate(ib, dY.colwise().sum());
            if (g.nodes_[ix].requires_grad) {
                Mat dX(dY.rows(), dY.cols());
                for (Eigen::Index r = 0; r < dY.rows(); ++r) {
                    Eigen::ArrayXd dxh = (dY.row(r).cwiseProduct(G.row(0))).array();
                    Eigen::ArrayXd xh = xhat_p->row(r).array();
                    double m1 = dxh.mean();
                    double m2 = (dxh * xh).mean();
                    dX.row(r) = ((*inv_p)(r) * (dxh - m1 - xh * m2)).matrix();
                }
                g.accumulate(ix, dX);
            }
        };
    }
    return v;
}

Value Graph::gather_rows(Value x, std::vector<int> rows) {
    int ix = check(x);
    const Mat& X = nodes_[ix].val;
    Mat out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (rows[k] < 0 || rows[k] >= X.rows())
            throw ContractViolation("autodiff: gather_rows index out of range");
        out.row(static_cast<Eigen::Index>(k)) = X.row(rows[k]);
    }
    bool rg = needs(x);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        auto idx = std::make_shared<std::vector<int>>(std::move(rows));
        nodes_[self].back = [self, ix, idx](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            Mat dX = Mat::Zero(g.nodes_[ix].val.rows(), g.nodes_[ix].val.cols());
            for (std::size_t k = 0; k < idx->size(); ++k)
                dX.row((*idx)[k]) += dC.row(static_cast<Eigen::Index>(k));
            g.accumulate(ix, dX);
        };
    }
    return v;
}

Value Graph::slice_cols(Value x, int begin, int count) {
    int ix = check(x);
    const Mat& X = nodes_[ix].val;
    if (begin < 0 || count < 0 || begin + count > X.cols())
        throw ContractViolation("autodiff: slice_cols out of range");
    bool rg = needs(x);
    Value v = make(X.middleCols(begin, count), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ix, begin, count](Graph& g) {
            Mat dX = Mat::Zero(g.nodes_[ix].val.rows(), g.nodes_[ix].val.cols());
            dX.middleCols(begin, count) = g.nodes_[self].grad;
            g.accumulate(ix, dX);
        };
    }
    return v;
}

Value Graph::hconcat(const std::vector<Value>& parts) {
    if (parts.empty()) throw ContractViolation("autodiff: hconcat of nothing");
    Eigen::Index rows = nodes_[check(parts[0])].val.rows();
    Eigen::Index cols = 0;
    bool rg = false;
    for (Value p : parts) {
        const Mat& m = nodes_[check(p)].val;
        if (m.rows() != rows) throw ContractViolation("autodiff: hconcat row mismatch");
        cols += m.cols();
        rg = rg || needs(p);
    }
    Mat out(rows, cols);
    Eigen::Index off = 0;
    std::vector<int> ids;
    std::vector<int> widths;
    for (Value p : parts) {
        const Mat& m = nodes_[p.id].val;
        out.middleCols(off, m.cols()) = m;
        ids.push_back(p.id);
        widths.push_back(static_cast<int>(m.cols()));
        off += m.cols();
    }
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ids, widths](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            Eigen::Index o = 0;
            for (std::size_t k = 0; k < ids.size(); ++k) {
                g.accumulate(ids[k], dC.middleCols(o, widths[k]));
                o += widths[k];
            }
        };
    }
    return v;
}

Value Graph::select_entries(Value x, std::vector<std::pair<int, int>> idx) {
    int ix = check(x);
    const Mat& X = nodes_[ix].val;
    Mat out(static_cast<Eigen::Index>(idx.size()), 1);
    for (std::size_t k = 0; k < idx.size(); ++k) {
        auto [r, c] = idx[k];
        if (r < 0 || r >= X.rows() || c < 0 || c >= X.cols())
            throw ContractViolation("autodiff: select_entries index out of range");
        out(static_cast<Eigen::Index>(k), 0) = X(r, c);
    }
    bool rg = needs(x);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        auto id2 = std::make_shared<std::vector<std::pair<int, int>>>(std::move(idx));
        nodes_[self].back = [self, ix, id2](Graph& g) {
            const Mat& dC = g.nodes_[self].grad;
            Mat dX = Mat::Zero(g.nodes_[ix].val.rows(), g.nodes_[ix].val.cols());
            for (std::size_t k = 0; k < id2->size(); ++k)
                dX((*id2)[k].first, (*id2)[k].second) += dC(static_cast<Eigen::Index>(k), 0);
            g.accumulate(ix, dX);
        };
    }
    return v;
}

Value Graph::mean_all(Value x) {
    int ix = check(x);
    const Mat& X = nodes_[ix].val;
    Mat out(1, 1);
    out(0, 0) = X.mean();
    bool rg = needs(x);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ix](Graph& g) {
            const Mat& X2 = g.nodes_[ix].val;
            double s = g.nodes_[self].grad(0, 0) / static_cast<double>(X2.size());
            g.accumulate(ix, Mat::Constant(X2.rows(), X2.cols(), s));
        };
    }
    return v;
}

Value Graph::sum_all(Value x) {
    int ix = check(x);
    const Mat& X = nodes_[ix].val;
    Mat out(1, 1);
    out(0, 0) = X.sum();
    bool rg = needs(x);
    Value v = make(std::move(out), rg, nullptr);
    if (rg) {
        int self = v.id;
        nodes_[self].back = [self, ix](Graph& g) {
            const Mat& X2 = g.nodes_[ix].val;
            double s = g.nodes_[self].grad(0, 0);
            g.accumulate(ix, Mat::Constant(X2.rows(), X2.cols(), s));
        };
    }
    return v;
}

}  // namespace cofipara::ad
