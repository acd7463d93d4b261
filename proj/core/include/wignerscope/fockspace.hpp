#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace wignerscope {

using cplx = std::complex<double>;

/// Phase-space point z = (q, p).
struct PhasePoint {
  double q = 0.0;
  double p = 0.0;
};

/// [z, phi] = q cos(phi) + p sin(phi).
inline double project(const PhasePoint& z, double cos_phi, double sin_phi) {
  return z.q * cos_phi + z.p * sin_phi;
}

/// Largest Hermite/Laguerre order accepted by the scalar special-function API.
inline constexpr std::size_t kMaxSpecialOrder = 2000;

/// Trace budget lost to truncation before materialize() grows the basis.
inline constexpr double kTailTolerance = 1e-8;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

/// Normalized Hermite function psi_j(x) (the oscillator eigenfunction).
/// Throws UnsupportedOrderError for j > kMaxSpecialOrder.
double hermite_psi(std::size_t j, double x);

/// psi_0(x) ... psi_{out.size()-1}(x). Uses the same rescaled recurrence as
/// hermite_psi and has no order budget.
void hermite_psi_all(double x, std::span<double> out);
std::vector<double> hermite_psi_all(std::size_t max_order, double x);

/// Laguerre polynomial L_k(x), x >= 0.
double laguerre(std::size_t k, double x);

/// Normalized Laguerre functions
///   l_n^{(a)}(x) = sqrt(n!/(n+a)!) x^{a/2} e^{-x/2} L_n^{(a)}(x),  n = 0..out.size()-1,
/// all bounded by 1 in magnitude. Rescaled internally so large x does not underflow.
void laguerre_functions(std::size_t a, double x, std::span<double> out);

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Truncated density matrix in the Fock basis, entries(j, k) = <psi_j, rho psi_k>.
/// Construction enforces exact Hermiticity and validates positivity and trace.
class DensityMatrix {
 public:
  /// `entries` is row-major dim x dim. Throws ValidationError when the
  /// matrix is not (numerically) a density matrix.
  DensityMatrix(std::size_t dim, std::vector<cplx> entries, double tail_mass = 0.0);

  static DensityMatrix diagonal(std::span<const double> populations, double tail_mass = 0.0);
  /// |c><c| for an amplitude vector (not renormalized; the missing norm is the tail).
  static DensityMatrix pure(std::span<const cplx> amplitudes);

  std::size_t dim() const noexcept { return dim_; }
  double tail_mass() const noexcept { return tail_mass_; }
  cplx operator()(std::size_t j, std::size_t k) const { return entries_[j * dim_ + k]; }
  std::span<const cplx> entries() const noexcept { return entries_; }
  double trace() const;
  double min_eigenvalue() const;
  bool is_diagonal(double tol = 0.0) const;

  /// Zero-padded copy with a larger basis.
  DensityMatrix padded(std::size_t dim) const;

 private:
  std::size_t dim_;
  std::vector<cplx> entries_;
  double tail_mass_;
};

struct FockState {
  std::size_t n = 0;
};
struct CoherentState {
  double q0 = 0.0;
  double p0 = 0.0;
};
struct SqueezedState {
  double s = 0.0;
};
enum class CatAxis { q, p };
/// Even superposition of coherent states centred at (+-q0, 0), or at
/// (0, +-q0) with the p axis.
struct CatState {
  double q0 = 3.0;
  CatAxis axis = CatAxis::q;
};
struct CustomState {
  std::vector<cplx> entries;  // row-major
  std::size_t dim = 0;
  double tail_mass = 0.0;
  std::string source;         // file path it came from, informational
};

struct StateSpec {
  std::variant<FockState, CoherentState, SqueezedState, CatState, CustomState> kind;
  std::size_t dim = 0;    ///< requested truncation; 0 picks one from the tail rule
  bool auto_grow = true;  ///< grow dim until the tail mass is <= kTailTolerance
};

/// Parses the CLI grammar: fock:<n>, coherent:<q0>,<p0>, squeezed:<s>,
/// cat:<q0>[,q|p], file:<path> (a DensityMatrix JSON file).
StateSpec parse_state_spec(std::string_view text);
/// Canonical text form (file: states are rendered as custom:<dim>).
std::string to_string(const StateSpec& spec);

DensityMatrix materialize(const StateSpec& spec);

// ---------------------------------------------------------------------------
// Wigner functions
// ---------------------------------------------------------------------------

/// W_rho(z) from the closed-form Laguerre expansion of the basis functions W_jk.
double wigner_eval(const DensityMatrix& rho, const PhasePoint& z);

/// Sum_{j,k} |rho_jk - tau_jk|^2, padding the smaller matrix with zeros.
double hs_distance_sq(const DensityMatrix& rho, const DensityMatrix& tau);

// JSON {dim, tail_mass, re[][], im[][]}
std::string to_json(const DensityMatrix& rho);
DensityMatrix density_matrix_from_json(std::string_view text);

}  // namespace wignerscope
