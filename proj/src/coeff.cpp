#include "pdslab/coeff.hpp"

#include <algorithm>
#include <cmath>

namespace pdslab {

namespace {

constexpr double kPruneRel = 1e-14;
constexpr int kDegreeCap = 64;

double map_max_norm(const MatPolyU& m) {
    double mx = 0.0;
    for (const auto& [e, c] : m) mx = std::max(mx, c.cwiseAbs().maxCoeff());
    return mx;
}

double map_max_norm(const PolyU& m) {
    double mx = 0.0;
    for (const auto& [e, c] : m) mx = std::max(mx, std::abs(c));
    return mx;
}

void prune(MatPolyU& m) {
    const double mx = map_max_norm(m);
    for (auto it = m.begin(); it != m.end();) {
        if (it->second.cwiseAbs().maxCoeff() <= kPruneRel * mx)
            it = m.erase(it);
        else
            ++it;
    }
}

void prune(PolyU& m) {
    const double mx = map_max_norm(m);
    for (auto it = m.begin(); it != m.end();) {
        if (std::abs(it->second) <= kPruneRel * mx)
            it = m.erase(it);
        else
            ++it;
    }
}

MatPolyU mat_poly_mul(const MatPolyU& a, const MatPolyU& b) {
    MatPolyU out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) {
            CMatrix prod = ca * cb;
            auto it = out.find(ea + eb);
            if (it == out.end())
                out.emplace(ea + eb, std::move(prod));
            else
                it->second += prod;
        }
    prune(out);
    return out;
}

MatPolyU mat_scalar_mul(const MatPolyU& a, const PolyU& s) {
    MatPolyU out;
    for (const auto& [ea, ca] : a)
        for (const auto& [es, cs] : s) {
            auto it = out.find(ea + es);
            if (it == out.end())
                out.emplace(ea + es, CMatrix(ca * cs));
            else
                it->second += ca * cs;
        }
    prune(out);
    return out;
}

int val_of(const MatPolyU& m) {
    if (m.empty()) return TORDER_ZERO;
    return m.begin()->first;
}

int val_of(const PolyU& m) {
    if (m.empty()) return TORDER_ZERO;
    return m.begin()->first;
}

void check_degree(const MatPolyU& num, const PolyU& den) {
    auto spread = [](int lo, int hi) { return hi - lo; };
    if (!num.empty() && spread(num.begin()->first, num.rbegin()->first) > kDegreeCap)
        throw TruncationOverflow("coefficient numerator degree exceeded cap");
    if (!den.empty() && spread(den.begin()->first, den.rbegin()->first) > kDegreeCap)
        throw TruncationOverflow("coefficient denominator degree exceeded cap");
}

}  // namespace

PolyU poly_mul(const PolyU& a, const PolyU& b) {
    PolyU out;
    for (const auto& [ea, ca] : a)
        for (const auto& [eb, cb] : b) out[ea + eb] += ca * cb;
    prune(out);
    return out;
}

PolyU poly_add(const PolyU& a, const PolyU& b) {
    PolyU out = a;
    for (const auto& [e, c] : b) out[e] += c;
    prune(out);
    return out;
}

Complex poly_eval(const PolyU& p, double u) {
    Complex acc = 0.0;
    for (const auto& [e, c] : p) acc += c * std::pow(u, e);
    return acc;
}

MatrixFunction MatrixFunction::make_rational(int r, int c, MatPolyU num, PolyU den) {
    prune(num);
    prune(den);
    if (den.empty()) throw Error("MatrixFunction: zero denominator");

    // Shift common powers of u out of the denominator, then scale its lowest
    // coefficient to one. Single-term denominators fold into the numerator.
    const int dval = den.begin()->first;
    if (dval != 0) {
        PolyU d2;
        for (const auto& [e, v] : den) d2[e - dval] = v;
        MatPolyU n2;
        for (const auto& [e, v] : num) n2[e - dval] = v;
        den = std::move(d2);
        num = std::move(n2);
    }
    const Complex lead = den.begin()->second;
    for (auto& [e, v] : den) v /= lead;
    for (auto& [e, v] : num) v /= lead;
    if (den.size() == 1) den = PolyU{{0, 1.0}};
    check_degree(num, den);

    MatrixFunction out;
    out.rows_ = r;
    out.cols_ = c;
    out.rational_ = Rational{std::move(num), std::move(den)};
    return out;
}

MatrixFunction MatrixFunction::constant(const CMatrix& c) {
    MatPolyU num;
    if (c.cwiseAbs().maxCoeff() > 0) num[0] = c;
    return make_rational((int)c.rows(), (int)c.cols(), std::move(num), {{0, 1.0}});
}

MatrixFunction MatrixFunction::zero(int rows, int cols) {
    return make_rational(rows, cols, {}, {{0, 1.0}});
}

MatrixFunction MatrixFunction::rational(MatPolyU num, PolyU den) {
    if (num.empty()) throw Error("MatrixFunction::rational: empty numerator, use zero()");
    const int r = (int)num.begin()->second.rows();
    const int c = (int)num.begin()->second.cols();
    for (const auto& [e, m] : num)
        if (m.rows() != r || m.cols() != c)
            throw DimensionMismatch("MatrixFunction::rational: ragged coefficient shapes");
    return make_rational(r, c, std::move(num), std::move(den));
}

MatrixFunction MatrixFunction::generic(std::function<CMatrix(double)> f, int rows, int cols,
                                       int declared_torder, std::function<CMatrix(double)> df) {
    MatrixFunction out;
    out.rows_ = rows;
    out.cols_ = cols;
    auto g = std::make_shared<Generic>();
    g->f = std::move(f);
    g->df = std::move(df);
    g->torder = declared_torder;
    out.generic_ = std::move(g);
    return out;
}

CMatrix MatrixFunction::eval(double t) const {
    if (!valid()) throw Error("MatrixFunction: eval on empty function");
    if (rational_) {
        const double u = 1.0 / (1.0 + t);
        CMatrix acc = CMatrix::Zero(rows_, cols_);
        for (const auto& [e, c] : rational_->num) acc += c * std::pow(u, e);
        return acc / poly_eval(rational_->den, u);
    }
    return generic_->f(t);
}

MatrixFunction MatrixFunction::derivative() const {
    if (!valid()) throw Error("MatrixFunction: derivative of empty function");
    if (rational_) {
        // d/dt u^e = -e u^{e+1};  (n/d)' = (n' d - n d') / d^2.
        MatPolyU dnum;
        for (const auto& [e, c] : rational_->num)
            if (e != 0) dnum[e + 1] = -double(e) * c;
        PolyU dden;
        for (const auto& [e, c] : rational_->den)
            if (e != 0) dden[e + 1] = -double(e) * c;
        MatPolyU top = mat_scalar_mul(dnum, rational_->den);
        const MatPolyU n_dd = mat_scalar_mul(rational_->num, dden);
        for (const auto& [e, c] : n_dd) {
            auto it = top.find(e);
            if (it == top.end())
                top.emplace(e, CMatrix(-c));
            else
                it->second -= c;
        }
        return make_rational(rows_, cols_, std::move(top), poly_mul(rational_->den, rational_->den));
    }
    auto self = *this;
    if (generic_->df) {
        return generic(generic_->df, rows_, cols_, generic_->torder + 1);
    }
    auto fd = [self](double t) {
        const double h = std::max(1e-4, 1e-4 * (1.0 + t)) * 0.25;
        return (self.eval(t - 2 * h) - 8.0 * self.eval(t - h) + 8.0 * self.eval(t + h) -
                self.eval(t + 2 * h)) /
               (12.0 * h);
    };
    return generic(fd, rows_, cols_, generic_->torder + 1);
}

CMatrix MatrixFunction::deriv(double t, int order) const {
    MatrixFunction f = *this;
    for (int k = 0; k < order; ++k) f = f.derivative();
    return f.eval(t);
}

int MatrixFunction::torder() const {
    if (!valid()) return TORDER_ZERO;
    if (rational_) {
        const int nv = val_of(rational_->num);
        if (nv == TORDER_ZERO) return TORDER_ZERO;
        return nv - val_of(rational_->den);
    }
    return generic_->torder;
}

bool MatrixFunction::is_zero() const {
    if (!valid()) return true;
    if (rational_) return rational_->num.empty();
    return false;
}

MatrixFunction MatrixFunction::operator+(const MatrixFunction& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw DimensionMismatch("MatrixFunction: shape mismatch in +");
    if (rational_ && o.rational_) {
        if (rational_->den == o.rational_->den) {
            MatPolyU num = rational_->num;
            for (const auto& [e, c] : o.rational_->num) {
                auto it = num.find(e);
                if (it == num.end())
                    num.emplace(e, c);
                else
                    it->second += c;
            }
            return make_rational(rows_, cols_, std::move(num), rational_->den);
        }
        MatPolyU num = mat_scalar_mul(rational_->num, o.rational_->den);
        const MatPolyU other = mat_scalar_mul(o.rational_->num, rational_->den);
        for (const auto& [e, c] : other) {
            auto it = num.find(e);
            if (it == num.end())
                num.emplace(e, c);
            else
                it->second += c;
        }
        return make_rational(rows_, cols_, std::move(num),
                             poly_mul(rational_->den, o.rational_->den));
    }
    auto a = as_callable();
    auto b = o.as_callable();
    return generic([a, b](double t) { return CMatrix(a(t) + b(t)); }, rows_, cols_,
                   std::min(torder(), o.torder()));
}

MatrixFunction MatrixFunction::operator-(const MatrixFunction& o) const {
    return *this + o.scaled(-1.0);
}

MatrixFunction MatrixFunction::operator*(const MatrixFunction& o) const {
    if (cols_ != o.rows_) throw DimensionMismatch("MatrixFunction: shape mismatch in *");
    if (rational_ && o.rational_) {
        return make_rational(rows_, o.cols_, mat_poly_mul(rational_->num, o.rational_->num),
                             poly_mul(rational_->den, o.rational_->den));
    }
    auto a = as_callable();
    auto b = o.as_callable();
    const int to = (torder() == TORDER_ZERO || o.torder() == TORDER_ZERO)
                       ? TORDER_ZERO
                       : torder() + o.torder();
    return generic([a, b](double t) { return CMatrix(a(t) * b(t)); }, rows_, o.cols_, to);
}

MatrixFunction MatrixFunction::scaled(Complex a) const {
    if (rational_) {
        MatPolyU num = rational_->num;
        for (auto& [e, c] : num) c *= a;
        return make_rational(rows_, cols_, std::move(num), rational_->den);
    }
    auto f = as_callable();
    return generic([f, a](double t) { return CMatrix(a * f(t)); }, rows_, cols_, torder());
}

MatrixFunction MatrixFunction::inverse() const {
    if (rows_ != cols_) throw NotSquare("MatrixFunction: inverse of non-square block");
    if (rational_ && rows_ <= 3) {
        // Adjugate over determinant keeps the result rational.
        const MatPolyU& n = rational_->num;
        const int d = rows_;
        auto entry = [&](int i, int j) {
            PolyU p;
            for (const auto& [e, c] : n)
                if (std::abs(c(i, j)) != 0.0) p[e] = c(i, j);
            return p;
        };
        auto minor2 = [&](int r0, int c0, int r1, int c1) {
            return poly_add(poly_mul(entry(r0, c0), entry(r1, c1)),
                            [&] {
                                PolyU q = poly_mul(entry(r0, c1), entry(r1, c0));
                                for (auto& [e, v] : q) v = -v;
                                return q;
                            }());
        };
        PolyU det;
        std::vector<std::vector<PolyU>> adj(d, std::vector<PolyU>(d));
        if (d == 1) {
            det = entry(0, 0);
            adj[0][0] = PolyU{{0, 1.0}};
        } else if (d == 2) {
            det = minor2(0, 0, 1, 1);
            adj[0][0] = entry(1, 1);
            adj[1][1] = entry(0, 0);
            adj[0][1] = entry(0, 1);
            for (auto& [e, v] : adj[0][1]) v = -v;
            adj[1][0] = entry(1, 0);
            for (auto& [e, v] : adj[1][0]) v = -v;
        } else {
            auto cof = [&](int i, int j) {
                int rs[2], cs[2], k = 0;
                for (int r = 0; r < 3; ++r)
                    if (r != i) rs[k++] = r;
                k = 0;
                for (int c = 0; c < 3; ++c)
                    if (c != j) cs[k++] = c;
                PolyU m = minor2(rs[0], cs[0], rs[1], cs[1]);
                if ((i + j) % 2 == 1)
                    for (auto& [e, v] : m) v = -v;
                return m;
            };
            det = {};
            for (int j = 0; j < 3; ++j) det = poly_add(det, poly_mul(entry(0, j), cof(0, j)));
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) adj[i][j] = cof(j, i);
        }
        if (det.empty()) throw Error("MatrixFunction: inverse of singular rational block");
        MatPolyU out_num;
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (const auto& [e, v] : poly_mul(adj[i][j], rational_->den)) {
                    auto it = out_num.find(e);
                    if (it == out_num.end()) it = out_num.emplace(e, CMatrix::Zero(d, d)).first;
                    it->second(i, j) += v;
                }
        // (n/den)^-1 = den * adj(n) / det(n); den appears once per entry above.
        return make_rational(d, d, std::move(out_num), det);
    }
    auto f = as_callable();
    return generic(
        [f](double t) {
            CMatrix m = f(t);
            return CMatrix(m.partialPivLu().inverse());
        },
        rows_, cols_, 0);
}

MatrixFunction MatrixFunction::block_masked(bool keep_diagonal_blocks) const {
    if (rows_ != cols_) throw NotSquare("MatrixFunction: block mask needs a square block");
    const int d = rows_;
    auto mask = [d, keep_diagonal_blocks](CMatrix m) {
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                const bool diag_block = (i == 0 && j == 0) || (i > 0 && j > 0);
                if (diag_block != keep_diagonal_blocks) m(i, j) = 0.0;
            }
        return m;
    };
    if (rational_) {
        MatPolyU num;
        for (const auto& [e, c] : rational_->num) num[e] = mask(c);
        return make_rational(rows_, cols_, std::move(num), rational_->den);
    }
    auto f = as_callable();
    return generic([f, mask](double t) { return mask(f(t)); }, rows_, cols_, torder());
}

MatrixFunction MatrixFunction::block(int r0, int c0, int nr, int nc) const {
    if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_)
        throw DimensionMismatch("MatrixFunction: block out of range");
    if (rational_) {
        MatPolyU num;
        for (const auto& [e, c] : rational_->num) num[e] = c.block(r0, c0, nr, nc);
        return make_rational(nr, nc, std::move(num), rational_->den);
    }
    auto f = as_callable();
    return generic([f, r0, c0, nr, nc](double t) { return CMatrix(f(t).block(r0, c0, nr, nc)); },
                   nr, nc, torder());
}

MatrixFunction MatrixFunction::embedded(int rows, int cols, int r0, int c0) const {
    if (r0 + rows_ > rows || c0 + cols_ > cols)
        throw DimensionMismatch("MatrixFunction: embed out of range");
    if (rational_) {
        MatPolyU num;
        for (const auto& [e, c] : rational_->num) {
            CMatrix big = CMatrix::Zero(rows, cols);
            big.block(r0, c0, rows_, cols_) = c;
            num[e] = big;
        }
        return make_rational(rows, cols, std::move(num), rational_->den);
    }
    auto f = as_callable();
    const int nr = rows_, nc = cols_;
    return generic(
        [f, rows, cols, r0, c0, nr, nc](double t) {
            CMatrix big = CMatrix::Zero(rows, cols);
            big.block(r0, c0, nr, nc) = f(t);
            return big;
        },
        rows, cols, torder());
}

MatrixFunction MatrixFunction::adjoint_at_fixed_t() const {
    if (rational_) {
        MatPolyU num;
        PolyU den;
        for (const auto& [e, c] : rational_->num) num[e] = c.adjoint();
        for (const auto& [e, c] : rational_->den) den[e] = std::conj(c);
        return make_rational(cols_, rows_, std::move(num), std::move(den));
    }
    auto f = as_callable();
    return generic([f](double t) { return CMatrix(f(t).adjoint()); }, cols_, rows_, torder());
}

const MatPolyU& MatrixFunction::num() const {
    if (!rational_) throw Error("MatrixFunction: generic function has no rational form");
    return rational_->num;
}

const PolyU& MatrixFunction::den() const {
    if (!rational_) throw Error("MatrixFunction: generic function has no rational form");
    return rational_->den;
}

std::function<CMatrix(double)> MatrixFunction::as_callable() const {
    auto self = *this;
    return [self](double t) { return self.eval(t); };
}

TClassDiagnostic t_class_diagnostic(const MatrixFunction& f, int ell, int max_deriv,
                                    const std::vector<double>& t_grid, double slope_slack) {
    TClassDiagnostic out;
    std::vector<double> lx, ly;
    for (int k = 0; k <= max_deriv; ++k) {
        MatrixFunction g = f;
        for (int j = 0; j < k; ++j) g = g.derivative();
        for (double t : t_grid) {
            const double ratio = opnorm(g.eval(t)) * std::pow(1.0 + t, ell + k);
            out.sup = std::max(out.sup, ratio);
            if (ratio > 1e-300) {
                lx.push_back(std::log(1.0 + t));
                ly.push_back(std::log(ratio));
            }
        }
    }
    if (lx.size() >= 3) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double n = (double)lx.size();
        for (size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        const double denom = n * sxx - sx * sx;
        out.slope = (denom != 0.0) ? (n * sxy - sx * sy) / denom : 0.0;
    }
    out.pass = out.slope <= slope_slack;
    return out;
}

}  // namespace pdslab
