#include "pdslab/system.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace pdslab {

using nlohmann::json;

CMatrix symbol_A(const SystemSpec& spec, double t, const std::vector<double>& xi) {
    if ((int)xi.size() != spec.n) throw DimensionMismatch("symbol_A: xi has wrong length");
    CMatrix acc = CMatrix::Zero(spec.d, spec.d);
    for (int k = 0; k < spec.n; ++k) acc += xi[k] * spec.A[k].eval(t);
    return acc;
}

HypothesisReport check_b1_b2(const SystemSpec& spec, const std::vector<double>& t_grid,
                             const Tolerances& tol) {
    HypothesisReport rep;
    rep.kappa = std::numeric_limits<double>::infinity();
    bool b1 = true, b2 = true;
    int kernel_dim = -1;

    for (double t : t_grid) {
        GridPointMargin m;
        m.t = t;

        double asym = 0.0;
        for (const auto& a : spec.A) {
            const CMatrix at = a.eval(t);
            asym = std::max(asym, opnorm(at - at.adjoint()) / std::max(1.0, opnorm(at)));
        }
        m.asym = asym;

        const CMatrix b = spec.B.eval(t);
        const CMatrix reb = 0.5 * (b + b.adjoint());
        Eigen::SelfAdjointEigenSolver<CMatrix> sa(reb);
        m.min_re_b = sa.eigenvalues().minCoeff();
        if (m.asym > tol.hermitian_slack || m.min_re_b < -tol.semidefinite_slack) b1 = false;

        const EigDecomp eb = eig(b);
        const double bscale = std::max(1.0, opnorm(b));
        int nker = 0;
        double kernel_abs = std::numeric_limits<double>::infinity();
        double gap = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < eb.values.size(); ++i) {
            const double mag = std::abs(eb.values(i));
            if (mag <= tol.kernel_eig * bscale) {
                ++nker;
                kernel_abs = std::min(kernel_abs, mag);
            } else {
                gap = std::min(gap, eb.values(i).real());
            }
        }
        m.kernel_abs = (nker > 0) ? kernel_abs : std::abs(eb.values(0));
        m.gap = gap;
        if (nker == 0 || gap < tol.kappa_min) b2 = false;
        if (kernel_dim < 0) kernel_dim = nker;
        if (nker != kernel_dim) b2 = false;
        rep.kappa = std::min(rep.kappa, gap);
        rep.margins.push_back(m);
    }

    rep.b1_ok = b1;
    rep.b2_ok = b2;
    rep.kernel_dim = std::max(kernel_dim, 0);
    if (rep.b2_ok && rep.kernel_dim != 1) {
        std::ostringstream os;
        os << "kernel of B has dimension " << rep.kernel_dim
           << "; the (1, d-1) block partition requires dimension 1";
        throw KernelDimensionUnsupported(os.str());
    }
    if (!std::isfinite(rep.kappa)) rep.kappa = 0.0;
    return rep;
}

void check_kalman(const SystemSpec& spec, const std::vector<double>& t_grid,
                  const std::vector<std::vector<double>>& sphere_grid, HypothesisReport& rep,
                  const Tolerances& tol) {
    rep.kalman_sigma_min = std::numeric_limits<double>::infinity();
    for (double t : t_grid) {
        const CMatrix b = spec.B.eval(t);
        for (const auto& omega : sphere_grid) {
            const CMatrix a = symbol_A(spec, t, omega);
            CMatrix stack(spec.d * spec.d, spec.d);
            CMatrix apow = CMatrix::Identity(spec.d, spec.d);
            for (int j = 0; j < spec.d; ++j) {
                stack.middleRows(j * spec.d, spec.d) = b * apow;
                apow = apow * a;
            }
            const double sigma = svd_min(stack);
            if (sigma < rep.kalman_sigma_min) {
                rep.kalman_sigma_min = sigma;
                rep.kalman_worst_t = t;
                rep.kalman_worst_omega = omega;
            }
        }
    }
    rep.b3_ok = rep.kalman_sigma_min > tol.kalman_sigma_min;
}

HypothesisReport check_hypotheses(const SystemSpec& spec, const Tolerances& tol) {
    HypothesisReport rep = check_b1_b2(spec, default_t_grid(), tol);
    check_kalman(spec, default_t_grid(), default_sphere_grid(spec.n), rep, tol);
    return rep;
}

std::vector<double> default_t_grid() {
    std::vector<double> g;
    for (double t = 1.0; t <= 1024.0; t *= 2.0) g.push_back(t);
    return g;
}

std::vector<std::vector<double>> default_sphere_grid(int n) {
    std::vector<std::vector<double>> g;
    if (n == 1) {
        g.push_back({1.0});
        g.push_back({-1.0});
    } else if (n == 2) {
        for (int k = 0; k < 64; ++k) {
            const double phi = 2.0 * std::numbers::pi * k / 64.0;
            g.push_back({std::cos(phi), std::sin(phi)});
        }
    } else {
        throw Error("default_sphere_grid: only n = 1, 2 supported");
    }
    return g;
}

namespace {

CMatrix mat2(double a11, double a12, double a21, double a22) {
    CMatrix m(2, 2);
    m << a11, a12, a21, a22;
    return m;
}

}  // namespace

SystemSpec builtin(const std::string& name) {
    SystemSpec s;
    s.name = name;
    s.n = 1;
    s.t0 = 1.0;
    if (name == "damped_wave" || name == "damped_wave_b0" || name == "damped_wave_bt") {
        s.d = 2;
        s.A = {MatrixFunction::constant(mat2(0, 1, 1, 0))};
        if (name == "damped_wave") {
            s.B = MatrixFunction::constant(mat2(0, 0, 0, 1));
        } else if (name == "damped_wave_b0") {
            s.B = MatrixFunction::constant(mat2(0, 0, 0, 2));
        } else {
            // B = diag(0, 2 + 1/(1+t))
            MatPolyU num;
            num[0] = mat2(0, 0, 0, 2);
            num[1] = mat2(0, 0, 0, 1);
            s.B = MatrixFunction::rational(std::move(num));
        }
    } else if (name == "telegraph") {
        s.d = 2;
        s.A = {MatrixFunction::constant(mat2(1, 0, 0, -1))};
        s.B = MatrixFunction::constant(mat2(1, -1, -1, 1));
    } else if (name == "chain3") {
        s.d = 3;
        CMatrix a = CMatrix::Zero(3, 3);
        a(0, 1) = a(1, 0) = a(1, 2) = a(2, 1) = 1.0;
        CMatrix b = CMatrix::Zero(3, 3);
        b(1, 1) = b(2, 2) = 1.0;
        s.A = {MatrixFunction::constant(a)};
        s.B = MatrixFunction::constant(b);
    } else if (name == "uncoupled_bad") {
        s.d = 2;
        s.A = {MatrixFunction::constant(mat2(1, 0, 0, -1))};
        s.B = MatrixFunction::constant(mat2(0, 0, 0, 1));
    } else {
        throw UnknownName("builtin: unknown system '" + name + "'");
    }
    return s;
}

std::vector<std::string> builtin_names() {
    return {"damped_wave", "damped_wave_b0", "damped_wave_bt", "telegraph", "chain3",
            "uncoupled_bad"};
}

namespace {

CMatrix parse_matrix(const json& jm, int d, const std::string& where) {
    if (!jm.is_array() || (int)jm.size() != d)
        throw ParseError(where + ": expected " + std::to_string(d) + " rows");
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i) {
        const json& row = jm.at(i);
        if (!row.is_array() || (int)row.size() != d)
            throw ParseError(where + ": row " + std::to_string(i) + " has wrong length");
        for (int j = 0; j < d; ++j) {
            const json& z = row.at(j);
            if (!z.is_array() || z.size() != 2 || !z.at(0).is_number() || !z.at(1).is_number())
                throw ParseError(where + ": entry (" + std::to_string(i) + "," +
                                 std::to_string(j) + ") must be [re, im]");
            m(i, j) = Complex(z.at(0).get<double>(), z.at(1).get<double>());
        }
    }
    return m;
}

MatrixFunction parse_terms(const json& jt, int d, const std::string& where) {
    if (!jt.is_array()) throw ParseError(where + ": expected a list of terms");
    MatPolyU num;
    for (size_t k = 0; k < jt.size(); ++k) {
        const json& term = jt.at(k);
        if (!term.is_object()) throw ParseError(where + ": term must be an object");
        for (auto it = term.begin(); it != term.end(); ++it)
            if (it.key() != "exponent" && it.key() != "matrix")
                throw ParseError(where + ": unknown key '" + it.key() + "'");
        if (!term.contains("exponent") || !term.contains("matrix"))
            throw ParseError(where + ": term needs 'exponent' and 'matrix'");
        if (!term.at("exponent").is_number_integer())
            throw ParseError(where + ": 'exponent' must be an integer");
        const int e = term.at("exponent").get<int>();
        const CMatrix c = parse_matrix(term.at("matrix"), d, where);
        auto it = num.find(e);
        if (it == num.end())
            num.emplace(e, c);
        else
            it->second += c;
    }
    if (num.empty()) return MatrixFunction::zero(d, d);
    return MatrixFunction::rational(std::move(num));
}

json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
        rows.push_back(row);
    }
    return rows;
}

json terms_to_json(const MatrixFunction& f) {
    json terms = json::array();
    for (const auto& [e, c] : f.num())
        terms.push_back(json{{"exponent", e}, {"matrix", matrix_to_json(c)}});
    return terms;
}

}  // namespace

SystemSpec load_system(const std::string& config_text) {
    json j;
    try {
        j = json::parse(config_text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("config: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        if (k != "name" && k != "d" && k != "n" && k != "t0" && k != "A" && k != "B")
            throw ParseError("config: unknown key '" + k + "'");
    }
    for (const char* k : {"d", "n", "A", "B"})
        if (!j.contains(k)) throw ParseError(std::string("config: missing key '") + k + "'");

    SystemSpec s;
    if (!j.at("d").is_number_integer()) throw ParseError("config: 'd' must be an integer");
    if (!j.at("n").is_number_integer()) throw ParseError("config: 'n' must be an integer");
    s.d = j.at("d").get<int>();
    s.n = j.at("n").get<int>();
    s.t0 = j.value("t0", 1.0);
    s.name = j.value("name", "config");
    if (s.d < 2) throw ValidationError("d = " + std::to_string(s.d) +
                                       ": the (1, d-1) partition requires d >= 2");
    if (s.n < 1 || s.n > 2) throw ValidationError("n must be 1 or 2");
    if (s.t0 < 0) throw ValidationError("t0 must be >= 0");

    const json& ja = j.at("A");
    if (!ja.is_array() || (int)ja.size() != s.n)
        throw ParseError("config: 'A' must list n coefficient matrices");
    for (int k = 0; k < s.n; ++k)
        s.A.push_back(parse_terms(ja.at(k), s.d, "A[" + std::to_string(k) + "]"));
    s.B = parse_terms(j.at("B"), s.d, "B");

    // Structural validation: stored A coefficients must be self-adjoint
    // term by term, which makes A_k(t) self-adjoint for every t.
    for (int k = 0; k < s.n; ++k) {
        if (s.A[k].is_zero()) continue;
        for (const auto& [e, c] : s.A[k].num()) {
            if (opnorm(c - c.adjoint()) > 1e-12 * std::max(1.0, opnorm(c)))
                throw ValidationError("A[" + std::to_string(k) + "] not self-adjoint");
        }
    }
    if (s.B.is_zero()) throw ValidationError("B is identically zero");
    return s;
}

SystemSpec load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return load_system(ss.str());
}

std::string save_system(const SystemSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["d"] = spec.d;
    j["n"] = spec.n;
    j["t0"] = spec.t0;
    json ja = json::array();
    for (const auto& a : spec.A) ja.push_back(terms_to_json(a));
    j["A"] = ja;
    j["B"] = terms_to_json(spec.B);
    return j.dump(2);
}

}  // namespace pdslab
