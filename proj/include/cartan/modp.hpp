#pragma once

#include <gmpxx.h>

#include <array>
#include <string>
#include <vector>

namespace cartan {

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
  auto operator<=>(const Point&) const = default;
};

// (a b; c d)
struct Mat2 {
  mpz_class a, b, c, d;
};

// 2x2 matrix over F_p, entries in [0, p)
using ModMat = std::array<int, 4>;

struct Orbit {
  int label = 0;  // cusp: c in 1..(p-1)/2; unit: coset exponent l in 0..d-1
  bool at_infinity = false;
  std::vector<Point> members;  // sorted
};

struct LiftedPoint {
  Point a;
  mpq_class t1;  // in [0, 1)
  mpq_class t2;
};

class GroupContext {
 public:
  // h_generator == 0 means H = {+-1}.
  static GroupContext build(int p, int h_generator = 0);

  int p() const { return p_; }
  int xi() const { return xi_; }      // quadratic non-residue, in [1, p)
  int d() const { return d_; }        // [F_p^x : H]
  int m() const { return m_; }        // 2 or 6
  int g() const { return g_; }        // smallest primitive root
  const std::vector<int>& H() const { return H_; }
  int h_order() const { return static_cast<int>(H_.size()); }

  int mod(long long v) const;
  int inv(int t) const;
  int pow(int b, long long e) const;
  bool in_H(int t) const { return coset_[mod(t)] == 0; }
  // l with t in g^l H
  int coset_index(int t) const { return coset_[mod(t)]; }
  // g^l, representative of the coset
  int coset_rep(int l) const { return pow(g_, l); }

 private:
  int p_ = 0, xi_ = 0, d_ = 0, m_ = 0, g_ = 0;
  std::vector<int> H_;
  std::vector<int> coset_;  // indexed by residue; -1 at 0
};

bool is_prime(long long n);
int legendre(long long a, int p);
int primitive_root(int p);

std::vector<Orbit> cusp_orbits(const GroupContext& ctx);
// cusp labels grouped by the coset of c in F_p^x / H; d classes
std::vector<std::vector<int>> h_cusp_orbits(const GroupContext& ctx);
std::vector<Orbit> unit_orbits(const GroupContext& ctx);

// Lexicographically smallest (a, b) with a^2 - xi b^2 = 1/c; (1, 0) for c = 1.
std::pair<int, int> cusp_ab(const GroupContext& ctx, int c);
ModMat sigma_c_mod_p(const GroupContext& ctx, int c);
Mat2 sigma_c(const GroupContext& ctx, int c);
ModMat reduce(const Mat2& m, int p);

// row vector times matrix, mod p
Point act_right(const GroupContext& ctx, Point v, const ModMat& g);
Point act_left(const GroupContext& ctx, const ModMat& g, Point v);

// Conjugation-respecting lift; lift_alternate shifts t2 by an integer while
// keeping lift(x, -y) the conjugate of lift(x, y).
LiftedPoint lift(Point a, int p);
LiftedPoint lift_alternate(Point a, int p);

// Elements of the Cartan normalizer with determinant in H (all of them, or a sample).
std::vector<ModMat> normalizer_elements(const GroupContext& ctx, bool det_in_H = true);

}  // namespace cartan
