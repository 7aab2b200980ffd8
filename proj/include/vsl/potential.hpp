#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vsl/types.hpp"

namespace vsl {

// Dense per-node data of an isospectral (Darboux-type) move, cached on the
// uniform grid x_i = i/steps at construction.  K(x) = A (I + S(x) A)^{-1}
// with A = B_target - B_alpha; the transformed potential is evaluated from
// the derivative-free expansion
//   V~(x) = V(x) - 2 [phi' K phi* + phi K phi'* - (phi K phi*)^2](x).
struct DarbouxData {
    double lambda_alpha = 0;
    int alpha_index = 0;  // 1-based position in the ordered spectrum
    CMatrix a;            // B_target - B_alpha (Hermitian)
    CMatrix b_target;
    CMatrix b_alpha;

    // Node caches, size steps+1 each: the eigenvalue frame phi(x),
    // phi'(x), phi''(x) = (V - lambda) phi, the running Gram S(x), and K(x).
    std::vector<CMatrix> phi, dphi, ddphi, s, k;

    // Construction diagnostics.
    double k_hermitian_residual = 0;  // max ||K - K*|| over nodes
    double k_boundary_norm = 0;       // ||[phi K phi*](1)||
    double max_condition = 0;         // worst cond(I + S(x) A)

    int steps() const { return static_cast<int>(phi.size()) - 1; }
};

// Hermitian matrix potential on [0,1].  Immutable value type; evaluation is
// pure and safe to call concurrently.
class Potential {
public:
    Potential() = default;

    Index n() const;
    std::string kind() const;  // zero|constant_diagonal|fourier|grid|darboux|reflected

    // Hermitian N x N value at x in [0,1]; throws std::domain_error outside.
    CMatrix eval(double x) const;

    static Potential zero(Index n);
    static Potential constant_diagonal(RVector diag);

    // V(x) = C_0 + sum_{m>=1} C_m cos(m pi x); every C_m Hermitian.
    static Potential fourier(std::vector<CMatrix> cosine_coeffs);

    // Sampled values at strictly increasing xs with xs.front()==0 and
    // xs.back()==1; cubic Hermite interpolation with finite-difference
    // slopes between samples.
    static Potential grid(std::vector<double> xs, std::vector<CMatrix> values);

    static Potential darboux(Potential base, DarbouxData data);
    static Potential reflected(Potential source);

    // Accessors for composite kinds (nullptr / empty when not applicable).
    const DarbouxData* darboux_data() const;
    const Potential* base() const;  // darboux base or reflected source

    // Kind-specific payload accessors; throw ContractViolation when the
    // potential is of a different kind.
    const RVector& diag() const;
    const std::vector<CMatrix>& fourier_coeffs() const;
    const std::vector<double>& grid_xs() const;
    const std::vector<CMatrix>& grid_values() const;

    bool valid() const { return node_ != nullptr; }

    struct Node;  // defined in the implementation file

private:
    std::shared_ptr<const Node> node_;
    explicit Potential(std::shared_ptr<const Node> node);
};

// View with eval(x) = V(1 - x).
Potential reflect(const Potential& v);

// Seeded Hermitian cosine-series potential for tests and demos; coefficient
// magnitude decays like amplitude / (1 + m^2).
Potential random_fourier(Index n, int modes, double amplitude, unsigned seed);

// File round-trip.  Closed forms are preserved exactly; darboux and
// reflected kinds are materialized to a dense grid on save and the file is
// flagged with the originating kind.
void save_potential(const Potential& v, const std::string& path);
Potential load_potential(const std::string& path);

std::string potential_to_json_string(const Potential& v);
Potential potential_from_json_string(const std::string& text);

// FNV-1a hash of the canonical serialization; stable across runs.
std::string potential_hash(const Potential& v);

}  // namespace vsl
