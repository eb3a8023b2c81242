// Independent reference values for tests: Bessel-zero spectra of the disk,
// separation-of-variables spectra of rectangles. Deliberately brute force and
// separate from the library code paths they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oracle {

inline double bessel_j(int n, double x) { return std::cyl_bessel_j(n, x); }

inline double bessel_j_prime(int n, double x) {
  if (n == 0) return -std::cyl_bessel_j(1, x);
  return 0.5 * (std::cyl_bessel_j(n - 1, x) - std::cyl_bessel_j(n + 1, x));
}

// k-th positive zero (k >= 1) of f by scan-and-bisect
template <class F>
double nth_zero(const F& f, int k, double scan_from = 0.05, double scan_step = 0.05,
                double scan_to = 400.0) {
  int found = 0;
  double prev_x = scan_from, prev_f = f(scan_from);
  for (double x = scan_from + scan_step; x <= scan_to; x += scan_step) {
    const double fx = f(x);
    if (prev_f == 0.0) {
      ++found;
      if (found == k) return prev_x;
    } else if (prev_f * fx < 0) {
      ++found;
      if (found == k) {
        double lo = prev_x, hi = x, flo = prev_f;
        for (int it = 0; it < 200; ++it) {
          const double mid = 0.5 * (lo + hi);
          const double fm = f(mid);
          if (flo * fm <= 0)
            hi = mid;
          else {
            lo = mid;
            flo = fm;
          }
        }
        return 0.5 * (lo + hi);
      }
    }
    prev_x = x;
    prev_f = fx;
  }
  throw std::runtime_error("oracle::nth_zero: scan exhausted");
}

inline double bessel_zero(int n, int k) {
  return nth_zero([n](double x) { return bessel_j(n, x); }, k);
}

inline double bessel_prime_zero(int n, int k) {
  // j'_{0,1} = 0 is the trivial zero corresponding to the constant mode; skip it
  if (n == 0) return nth_zero([](double x) { return bessel_j_prime(0, x); }, k);
  return nth_zero([n](double x) { return bessel_j_prime(n, x); }, k);
}

// Dirichlet spectrum of the unit disk: j_{n,k}^2, multiplicity 2 for n >= 1
inline std::vector<double> disk_dirichlet_spectrum(int count) {
  std::vector<std::pair<double, int>> vals;
  const int n_max = 40, k_max = 30;
  for (int n = 0; n <= n_max; ++n)
    for (int k = 1; k <= k_max; ++k) {
      const double z = bessel_zero(n, k);
      vals.push_back({z * z, n == 0 ? 1 : 2});
    }
  std::sort(vals.begin(), vals.end());
  std::vector<double> out;
  for (auto [lam, mult] : vals) {
    for (int i = 0; i < mult && (int)out.size() < count; ++i) out.push_back(lam);
    if ((int)out.size() >= count) break;
  }
  if ((int)out.size() < count) throw std::runtime_error("disk spectrum: table too small");
  return out;
}

// Neumann spectrum of the unit disk, leading 0 included
inline std::vector<double> disk_neumann_spectrum(int count) {
  std::vector<std::pair<double, int>> vals = {{0.0, 1}};
  const int n_max = 40, k_max = 30;
  for (int n = 0; n <= n_max; ++n)
    for (int k = 1; k <= k_max; ++k) {
      const double z = bessel_prime_zero(n, k);
      if (z < 1e-8) continue;
      vals.push_back({z * z, n == 0 ? 1 : 2});
    }
  std::sort(vals.begin(), vals.end());
  std::vector<double> out;
  for (auto [lam, mult] : vals) {
    for (int i = 0; i < mult && (int)out.size() < count; ++i) out.push_back(lam);
    if ((int)out.size() >= count) break;
  }
  if ((int)out.size() < count) throw std::runtime_error("disk spectrum: table too small");
  return out;
}

// Dirichlet spectrum of the (0,pi)x(0,pi) square: m^2 + n^2
inline std::vector<double> square_dirichlet_spectrum(int count) {
  std::vector<double> vals;
  for (int m = 1; m <= 60; ++m)
    for (int n = 1; n <= 60; ++n) vals.push_back(double(m * m + n * n));
  std::sort(vals.begin(), vals.end());
  vals.resize(count);
  return vals;
}

}  // namespace oracle
