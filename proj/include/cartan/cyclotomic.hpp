#pragma once

#include <gmpxx.h>

#include <optional>
#include <string>
#include <vector>

#include "cartan/modp.hpp"
#include "cartan/precision.hpp"

namespace cartan {

// Element of Q(zeta_p) in the basis zeta, zeta^2, ..., zeta^(p-1).
class CycloElement {
 public:
  CycloElement() = default;
  explicit CycloElement(int p);
  static CycloElement rational(int p, const mpq_class& r);
  static CycloElement zeta_pow(int p, long k);
  // coefficients on zeta^0 .. zeta^(p-1), reduced into the basis
  static CycloElement from_unreduced(int p, const std::vector<mpq_class>& c);

  int p() const { return p_; }
  // coeff(i) is the coefficient of zeta^i, 1 <= i <= p-1
  const mpq_class& coeff(int i) const { return c_[i - 1]; }
  const std::vector<mpq_class>& coeffs() const { return c_; }

  bool is_zero() const;
  bool is_integral() const;
  std::optional<mpq_class> as_rational() const;
  bool fixed_by(const std::vector<int>& H) const;

  CycloElement galois(long t) const;  // zeta -> zeta^t
  CycloElement inverse() const;
  // embedding zeta -> e^{2 pi i k / p}
  BigComplex embed(long k) const;

  bool operator==(const CycloElement& o) const { return p_ == o.p_ && c_ == o.c_; }

 private:
  int p_ = 0;
  std::vector<mpq_class> c_;
  friend CycloElement operator*(const CycloElement&, const CycloElement&);
};

CycloElement operator+(const CycloElement& x, const CycloElement& y);
CycloElement operator-(const CycloElement& x, const CycloElement& y);
CycloElement operator-(const CycloElement& x);
CycloElement operator*(const CycloElement& x, const CycloElement& y);
CycloElement operator*(const CycloElement& x, const mpq_class& r);

// product of x^sigma_t over t in ts
CycloElement product_of_conjugates(const CycloElement& x, const std::vector<int>& ts);
mpq_class norm(const CycloElement& x);  // N_{Q(zeta)/Q}
CycloElement relative_norm(const CycloElement& x, const std::vector<int>& H);
// characteristic polynomial over Q of multiplication by x, low degree first
std::vector<mpq_class> char_poly(const CycloElement& x);
BigReal height(const CycloElement& x);

// e^{2 pi i j / p}, j = 0..p-1, at the working precision (cached per thread)
const std::vector<BigComplex>& roots_of_unity(int p);

struct UnitSystem {
  enum class Source { circular, external_file };
  CycloElement eta0;
  std::vector<CycloElement> etas;  // d-1 units
  Source source = Source::circular;

  static UnitSystem build(const GroupContext& ctx, const std::optional<std::string>& override_path = {});
  // M[k][l] = log|u_l^{sigma_k}|, sigma_k : zeta -> zeta^{g^k}; column 0 is eta0
  BigMatrix log_matrix(const GroupContext& ctx) const;
  const CycloElement& unit(int l) const { return l == 0 ? eta0 : etas[l - 1]; }
};

UnitSystem read_unit_basis(const GroupContext& ctx, const std::string& path);
void write_unit_basis(const UnitSystem& u, const GroupContext& ctx, const std::string& path);
// throws validation_failed with a reason if an invariant fails
void verify_unit_system(const GroupContext& ctx, const UnitSystem& u);

}  // namespace cartan
