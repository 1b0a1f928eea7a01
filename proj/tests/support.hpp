#pragma once

#include <cmath>
#include <random>

#include "optosync/measures.hpp"
#include "optosync/types.hpp"

namespace optosync::testing {

// Random Gaussian state: a random symplectic map applied to a thermal state.
// Squeezers, phase rotations and beam splitters are each symplectic.
inline Matrix8d random_physical_covariance(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::uniform_real_distribution<double> squeeze(-0.8, 0.8);
  std::uniform_real_distribution<double> occupation(0.0, 2.0);
  std::uniform_int_distribution<int> mode(0, kDim / 2 - 1);

  Matrix8d s = Matrix8d::Identity();
  for (int k = 0; k < 12; ++k) {
    Matrix8d op = Matrix8d::Identity();
    const int a = mode(rng);
    switch (k % 3) {
      case 0: {
        const double r = squeeze(rng);
        op(2 * a, 2 * a) = std::exp(r);
        op(2 * a + 1, 2 * a + 1) = std::exp(-r);
        break;
      }
      case 1: {
        const double th = angle(rng);
        op.block<2, 2>(2 * a, 2 * a) << std::cos(th), std::sin(th), -std::sin(th), std::cos(th);
        break;
      }
      default: {
        int b = mode(rng);
        if (b == a) b = (a + 1) % (kDim / 2);
        const double th = angle(rng);
        for (int c = 0; c < 2; ++c) {
          op(2 * a + c, 2 * a + c) = op(2 * b + c, 2 * b + c) = std::cos(th);
          op(2 * a + c, 2 * b + c) = std::sin(th);
          op(2 * b + c, 2 * a + c) = -std::sin(th);
        }
      }
    }
    s = op * s;
  }
  Vector8d thermal;
  for (int m = 0; m < kDim / 2; ++m) thermal[2 * m] = thermal[2 * m + 1] = occupation(rng) + 0.5;
  return s * thermal.asDiagonal() * s.transpose();
}

// Exchanges the two cavity-oscillator pairs.
inline Matrix8d label_swap() {
  Matrix8d p = Matrix8d::Zero();
  p.block<4, 4>(0, 4).setIdentity();
  p.block<4, 4>(4, 0).setIdentity();
  return p;
}

}  // namespace optosync::testing
