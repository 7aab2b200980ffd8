#include "vsl/potential.hpp"

#include <json.hpp>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "vsl/json_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <utility>

namespace vsl {

using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kMaterializeSteps = 4096;

// ---------------------------------------------------------------- hermite

struct HermiteWeights {
    double w0, w1, s0, s1;  // value and slope weights on [x_i, x_{i+1}]
};

HermiteWeights hermite_weights(double u, double h) {
    const double u2 = u * u, u3 = u2 * u;
    return {2 * u3 - 3 * u2 + 1, -2 * u3 + 3 * u2, h * (u3 - 2 * u2 + u),
            h * (u3 - u2)};
}

// Slopes of matrix-valued samples on a strictly increasing abscissa.
// Uniform grids with >= 5 points get 4th-order finite differences; anything
// else falls back to the 3-point nonuniform formula.
std::vector<CMatrix> fd_slopes(const std::vector<double>& xs,
                               const std::vector<CMatrix>& f) {
    const size_t n = xs.size();
    std::vector<CMatrix> m(n);
    if (n == 2) {
        m[0] = m[1] = (f[1] - f[0]) / (xs[1] - xs[0]);
        return m;
    }
    bool uniform = true;
    const double h = xs[1] - xs[0];
    for (size_t i = 1; i + 1 < n && uniform; ++i)
        if (std::abs((xs[i + 1] - xs[i]) - h) > 1e-12) uniform = false;

    if (uniform && n >= 5) {
        const double d = 12 * h;
        m[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / d;
        m[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / d;
        for (size_t i = 2; i + 2 < n; ++i)
            m[i] = (f[i - 2] - 8 * f[i - 1] + 8 * f[i + 1] - f[i + 2]) / d;
        m[n - 2] = (3 * f[n - 1] + 10 * f[n - 2] - 18 * f[n - 3] +
                    6 * f[n - 4] - f[n - 5]) /
                   d;
        m[n - 1] = (25 * f[n - 1] - 48 * f[n - 2] + 36 * f[n - 3] -
                    16 * f[n - 4] + 3 * f[n - 5]) /
                   d;
        return m;
    }

    for (size_t i = 0; i < n; ++i) {
        if (i == 0) {
            const double h0 = xs[1] - xs[0], h1 = xs[2] - xs[1];
            m[0] = -(2 * h0 + h1) / (h0 * (h0 + h1)) * f[0] +
                   (h0 + h1) / (h0 * h1) * f[1] - h0 / (h1 * (h0 + h1)) * f[2];
        } else if (i == n - 1) {
            const double h0 = xs[n - 2] - xs[n - 3], h1 = xs[n - 1] - xs[n - 2];
            m[i] = h1 / (h0 * (h0 + h1)) * f[n - 3] -
                   (h0 + h1) / (h0 * h1) * f[n - 2] +
                   (2 * h1 + h0) / (h1 * (h0 + h1)) * f[n - 1];
        } else {
            const double h0 = xs[i] - xs[i - 1], h1 = xs[i + 1] - xs[i];
            m[i] = -h1 / (h0 * (h0 + h1)) * f[i - 1] +
                   (h1 - h0) / (h0 * h1) * f[i] +
                   h0 / (h1 * (h0 + h1)) * f[i + 1];
        }
    }
    return m;
}

size_t bracket_index(const std::vector<double>& xs, double x) {
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    size_t i = (it == xs.begin()) ? 0 : size_t(it - xs.begin()) - 1;
    return std::min(i, xs.size() - 2);
}

}  // namespace

// ------------------------------------------------------------------- node

struct Potential::Node {
    enum class Kind { Zero, ConstantDiagonal, Fourier, Grid, Darboux, Reflected };

    Kind kind = Kind::Zero;
    Index n = 0;

    RVector diag;                      // ConstantDiagonal
    std::vector<CMatrix> coeffs;       // Fourier
    std::vector<double> xs;            // Grid
    std::vector<CMatrix> values;       // Grid
    std::vector<CMatrix> slopes;       // Grid (precomputed)
    Potential base;                    // Darboux / Reflected
    std::unique_ptr<DarbouxData> dbx;  // Darboux
};

Potential::Potential(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Index Potential::n() const {
    require(node_ != nullptr, "Potential: empty");
    return node_->n;
}

std::string Potential::kind() const {
    require(node_ != nullptr, "Potential: empty");
    switch (node_->kind) {
        case Node::Kind::Zero: return "zero";
        case Node::Kind::ConstantDiagonal: return "constant_diagonal";
        case Node::Kind::Fourier: return "fourier";
        case Node::Kind::Grid: return "grid";
        case Node::Kind::Darboux: return "darboux";
        case Node::Kind::Reflected: return "reflected";
    }
    return "?";
}

const DarbouxData* Potential::darboux_data() const {
    return node_ && node_->dbx ? node_->dbx.get() : nullptr;
}

const Potential* Potential::base() const {
    if (!node_) return nullptr;
    if (node_->kind == Node::Kind::Darboux ||
        node_->kind == Node::Kind::Reflected)
        return &node_->base;
    return nullptr;
}

const RVector& Potential::diag() const {
    require(node_ && node_->kind == Node::Kind::ConstantDiagonal,
            "Potential::diag: not a constant_diagonal potential");
    return node_->diag;
}

const std::vector<CMatrix>& Potential::fourier_coeffs() const {
    require(node_ && node_->kind == Node::Kind::Fourier,
            "Potential::fourier_coeffs: not a fourier potential");
    return node_->coeffs;
}

const std::vector<double>& Potential::grid_xs() const {
    require(node_ && node_->kind == Node::Kind::Grid,
            "Potential::grid_xs: not a grid potential");
    return node_->xs;
}

const std::vector<CMatrix>& Potential::grid_values() const {
    require(node_ && node_->kind == Node::Kind::Grid,
            "Potential::grid_values: not a grid potential");
    return node_->values;
}

Potential Potential::zero(Index n) {
    require(n >= 1, "Potential::zero: n must be >= 1");
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::Zero;
    node->n = n;
    return Potential(std::move(node));
}

Potential Potential::constant_diagonal(RVector diag) {
    require(diag.size() >= 1, "constant_diagonal: empty diagonal");
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::ConstantDiagonal;
    node->n = diag.size();
    node->diag = std::move(diag);
    return Potential(std::move(node));
}

Potential Potential::fourier(std::vector<CMatrix> cosine_coeffs) {
    require(!cosine_coeffs.empty(), "fourier: no coefficients");
    const Index n = cosine_coeffs[0].rows();
    for (const auto& c : cosine_coeffs) {
        require(c.rows() == n && c.cols() == n,
                "fourier: coefficient size mismatch");
        require(is_hermitian(c, 1e-10), "fourier: coefficient is not Hermitian");
    }
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::Fourier;
    node->n = n;
    node->coeffs = std::move(cosine_coeffs);
    return Potential(std::move(node));
}

Potential Potential::grid(std::vector<double> xs, std::vector<CMatrix> values) {
    require(xs.size() >= 2 && xs.size() == values.size(),
            "grid: need matching xs/values with at least two samples");
    require(std::abs(xs.front()) <= 1e-12 && std::abs(xs.back() - 1.0) <= 1e-12,
            "grid: xs must start at 0 and end at 1");
    for (size_t i = 1; i < xs.size(); ++i)
        require(xs[i] > xs[i - 1], "grid: xs must be strictly increasing");
    const Index n = values[0].rows();
    std::vector<CMatrix> herm(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        require(values[i].rows() == n && values[i].cols() == n,
                "grid: value size mismatch");
        require(is_hermitian(values[i], 1e-8), "grid: value is not Hermitian");
        herm[i] = hermitian_part(values[i]);
    }
    xs.front() = 0.0;
    xs.back() = 1.0;
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::Grid;
    node->n = n;
    node->xs = std::move(xs);
    node->values = std::move(herm);
    node->slopes = fd_slopes(node->xs, node->values);
    return Potential(std::move(node));
}

Potential Potential::darboux(Potential base, DarbouxData data) {
    require(base.valid(), "darboux: empty base");
    const Index n = base.n();
    require(!data.phi.empty() && data.phi.size() == data.dphi.size() &&
                data.phi.size() == data.s.size() &&
                data.phi.size() == data.ddphi.size() &&
                data.phi.size() == data.k.size(),
            "darboux: inconsistent cache");
    require(data.a.rows() == n && data.a.cols() == n, "darboux: A size mismatch");
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::Darboux;
    node->n = n;
    node->base = std::move(base);
    node->dbx = std::make_unique<DarbouxData>(std::move(data));
    return Potential(std::move(node));
}

Potential Potential::reflected(Potential source) {
    require(source.valid(), "reflected: empty source");
    auto node = std::make_shared<Node>();
    node->kind = Node::Kind::Reflected;
    node->n = source.n();
    node->base = std::move(source);
    return Potential(std::move(node));
}

Potential reflect(const Potential& v) {
    // reflect(reflect(V)) collapses back to V
    if (v.kind() == "reflected") return *v.base();
    return Potential::reflected(v);
}

// ------------------------------------------------------------------- eval

namespace {

CMatrix eval_grid(const Potential::Node& node, double x);
CMatrix eval_darboux(const Potential::Node& node, double x);

}  // namespace

CMatrix Potential::eval(double x) const {
    require(node_ != nullptr, "Potential: empty");
    if (!(x >= 0.0 && x <= 1.0))
        throw std::domain_error("Potential::eval: x outside [0,1]");
    const Node& node = *node_;
    switch (node.kind) {
        case Node::Kind::Zero:
            return CMatrix::Zero(node.n, node.n);
        case Node::Kind::ConstantDiagonal: {
            CMatrix m = CMatrix::Zero(node.n, node.n);
            for (Index i = 0; i < node.n; ++i) m(i, i) = node.diag(i);
            return m;
        }
        case Node::Kind::Fourier: {
            CMatrix m = node.coeffs[0];
            for (size_t j = 1; j < node.coeffs.size(); ++j)
                m += node.coeffs[j] * std::cos(double(j) * kPi * x);
            return m;
        }
        case Node::Kind::Grid:
            return eval_grid(node, x);
        case Node::Kind::Darboux:
            return eval_darboux(node, x);
        case Node::Kind::Reflected:
            return node.base.eval(1.0 - x);
    }
    throw std::logic_error("Potential::eval: unreachable");
}

namespace {

CMatrix eval_grid(const Potential::Node& node, double x) {
    const auto& xs = node.xs;
    const size_t i = bracket_index(xs, x);
    const double h = xs[i + 1] - xs[i];
    const double u = (x - xs[i]) / h;
    const auto w = hermite_weights(u, h);
    CMatrix m = w.w0 * node.values[i] + w.w1 * node.values[i + 1] +
                w.s0 * node.slopes[i] + w.s1 * node.slopes[i + 1];
    return hermitian_part(m);
}

// Hermite interpolation of the cached frame with exact slopes: phi' is
// stored, phi'' is cached, S' = phi* phi.
CMatrix eval_darboux(const Potential::Node& node, double x) {
    const DarbouxData& d = *node.dbx;
    const int steps = d.steps();
    const double t = x * steps;
    const int i = std::min(int(t), steps - 1);
    const double h = 1.0 / steps;
    const double u = t - i;
    const auto w = hermite_weights(u, h);

    const CMatrix p = w.w0 * d.phi[i] + w.w1 * d.phi[i + 1] +
                      w.s0 * d.dphi[i] + w.s1 * d.dphi[i + 1];
    const CMatrix dp = w.w0 * d.dphi[i] + w.w1 * d.dphi[i + 1] +
                       w.s0 * d.ddphi[i] + w.s1 * d.ddphi[i + 1];
    const CMatrix sp0 = d.phi[i].adjoint() * d.phi[i];
    const CMatrix sp1 = d.phi[i + 1].adjoint() * d.phi[i + 1];
    const CMatrix s =
        w.w0 * d.s[i] + w.w1 * d.s[i + 1] + w.s0 * sp0 + w.s1 * sp1;

    const Index n = p.rows();
    const CMatrix m = CMatrix::Identity(n, n) + s * d.a;
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-12 * std::max(sv(0), 1.0)) {
        std::ostringstream os;
        os << "darboux eval: I + S(x)A nearly singular at x = " << x;
        throw ConditioningError(os.str());
    }
    const CMatrix kx = d.a * m.partialPivLu().inverse();
    const CMatrix pk = p * kx;
    const CMatrix pkp = pk * p.adjoint();
    const CMatrix bump = dp * kx * p.adjoint() + pk * dp.adjoint() - pkp * pkp;
    return hermitian_part(node.base.eval(x) - 2.0 * bump);
}

}  // namespace

// ------------------------------------------------------------------ random

Potential random_fourier(Index n, int modes, double amplitude, unsigned seed) {
    require(n >= 1 && modes >= 0, "random_fourier: bad shape");
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<CMatrix> coeffs;
    for (int m = 0; m <= modes; ++m) {
        CMatrix r(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) r(i, j) = Complex(dist(gen), dist(gen));
        coeffs.push_back(hermitian_part(r) * (amplitude / (1.0 + m * m)));
    }
    return Potential::fourier(std::move(coeffs));
}

// ------------------------------------------------------------------- json

namespace {

// Closed forms serialize exactly; darboux and reflected materialize to a
// dense uniform grid, flagged with the originating kind.
json potential_to_json(const Potential& v) {
    json j;
    j["format"] = 1;
    j["n"] = int(v.n());
    const std::string kind = v.kind();
    if (kind == "zero") {
        j["kind"] = "zero";
    } else if (kind == "constant_diagonal") {
        j["kind"] = "constant_diagonal";
        json d = json::array();
        for (Index i = 0; i < v.diag().size(); ++i) d.push_back(v.diag()(i));
        j["diag"] = std::move(d);
    } else if (kind == "fourier") {
        j["kind"] = "fourier";
        json coeffs = json::array();
        for (const auto& c : v.fourier_coeffs()) coeffs.push_back(matrix_to_json(c));
        j["coeffs"] = std::move(coeffs);
    } else if (kind == "grid") {
        j["kind"] = "grid";
        j["xs"] = v.grid_xs();
        json vals = json::array();
        for (const auto& m : v.grid_values()) vals.push_back(matrix_to_json(m));
        j["values"] = std::move(vals);
    } else {  // darboux, reflected
        const int steps =
            v.darboux_data() ? v.darboux_data()->steps() : kMaterializeSteps;
        j["kind"] = "grid";
        j["materialized_from"] = kind;
        std::vector<double> xs(steps + 1);
        json vals = json::array();
        for (int i = 0; i <= steps; ++i) {
            xs[i] = double(i) / steps;
            vals.push_back(matrix_to_json(v.eval(xs[i])));
        }
        j["xs"] = std::move(xs);
        j["values"] = std::move(vals);
    }
    return j;
}

Potential potential_from_json(const json& j) {
    if (!j.is_object()) throw ParseError("potential file: expected an object");
    if (!j.contains("format") || j["format"] != 1)
        throw ParseError("potential file: missing or unsupported \"format\"");
    if (!j.contains("n") || !j["n"].is_number_integer())
        throw ParseError("potential file: missing integer \"n\"");
    const Index n = j["n"].get<Index>();
    if (n < 1) throw ParseError("potential file: \"n\" must be >= 1");
    if (!j.contains("kind") || !j["kind"].is_string())
        throw ParseError("potential file: missing string \"kind\"");
    const std::string kind = j["kind"].get<std::string>();

    try {
        if (kind == "zero") return Potential::zero(n);
        if (kind == "constant_diagonal") {
            if (!j.contains("diag") || !j["diag"].is_array() ||
                Index(j["diag"].size()) != n)
                throw ParseError("potential file: \"diag\" must have n entries");
            RVector d(n);
            for (Index i = 0; i < n; ++i) d(i) = j["diag"][i].get<double>();
            return Potential::constant_diagonal(std::move(d));
        }
        if (kind == "fourier") {
            if (!j.contains("coeffs") || !j["coeffs"].is_array() ||
                j["coeffs"].empty())
                throw ParseError("potential file: \"coeffs\" must be a nonempty list");
            std::vector<CMatrix> coeffs;
            for (size_t m = 0; m < j["coeffs"].size(); ++m)
                coeffs.push_back(matrix_from_json(
                    j["coeffs"][m], n, n,
                    "potential file: coeffs[" + std::to_string(m) + "]"));
            return Potential::fourier(std::move(coeffs));
        }
        if (kind == "grid") {
            if (!j.contains("xs") || !j["xs"].is_array())
                throw ParseError("potential file: grid needs \"xs\"");
            if (!j.contains("values") || !j["values"].is_array())
                throw ParseError("potential file: grid needs \"values\"");
            std::vector<double> xs = j["xs"].get<std::vector<double>>();
            if (j["values"].size() != xs.size())
                throw ParseError("potential file: xs/values length mismatch");
            std::vector<CMatrix> values;
            for (size_t i = 0; i < xs.size(); ++i)
                values.push_back(matrix_from_json(
                    j["values"][i], n, n,
                    "potential file: values[" + std::to_string(i) + "]"));
            return Potential::grid(std::move(xs), std::move(values));
        }
    } catch (const ContractViolation& e) {
        throw ParseError(std::string("potential file: ") + e.what());
    }
    throw ParseError("potential file: unknown kind \"" + kind + "\"");
}

}  // namespace

std::string potential_to_json_string(const Potential& v) {
    return potential_to_json(v).dump(2);
}

Potential potential_from_json_string(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError("potential file: invalid JSON");
    return potential_from_json(j);
}

void save_potential(const Potential& v, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot open for writing: " + path);
    out << potential_to_json_string(v) << "\n";
}

Potential load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open potential file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return potential_from_json_string(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()) + " [" + path + "]");
    }
}

std::string potential_hash(const Potential& v) {
    const std::string text = potential_to_json_string(v);
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

}  // namespace vsl
