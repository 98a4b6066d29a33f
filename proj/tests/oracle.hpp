#pragma once
// Test-side reference constructions built from Kronecker products, with no
// use of the library's bit-level algebra.

#include <complex>
#include <random>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline Matrix letter(char c) {
  Matrix m(2, 2);
  switch (c) {
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, Complex(0, -1), Complex(0, 1), 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: m << 1, 0, 0, 1; break;
  }
  return m;
}

// Text "[+|-][i]L1L2..." with L1 on the least significant index bit.
inline Matrix pauli(const std::string& text) {
  std::size_t pos = 0;
  Complex phase = 1.0;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    if (text[pos] == '-') phase = -phase;
    ++pos;
  }
  if (pos < text.size() && text[pos] == 'i') {
    phase *= Complex(0, 1);
    ++pos;
  }
  Matrix m = Matrix::Identity(1, 1);
  for (; pos < text.size(); ++pos) {
    Matrix next = Eigen::kroneckerProduct(letter(text[pos]), m).eval();
    m = next;
  }
  return phase * m;
}

inline std::string random_letters(std::mt19937_64& rng, unsigned q) {
  static const char kLetters[] = "IXYZ";
  std::string s;
  for (unsigned k = 0; k < q; ++k) s.push_back(kLetters[rng() % 4]);
  return s;
}

inline Eigen::VectorXcd random_state(std::mt19937_64& rng, unsigned q) {
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(Eigen::Index{1} << q);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(g(rng), g(rng));
  return v.normalized();
}

// Annihilation operator of mode j (1-based) under Jordan-Wigner with |0> empty:
// Z...Z (|0><1|)_j.
inline Matrix annihilation_jw(unsigned n, unsigned j) {
  Matrix lower(2, 2);
  lower << 0, 1, 0, 0;
  Matrix m = Matrix::Identity(1, 1);
  for (unsigned k = 1; k <= n; ++k) {
    Matrix f = k < j ? letter('Z') : (k == j ? lower : letter('I'));
    Matrix next = Eigen::kroneckerProduct(f, m).eval();
    m = next;
  }
  return m;
}

}  // namespace oracle
