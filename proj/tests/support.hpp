#pragma once

#include <cmath>
#include <numbers>

#include "hjhom/environment.hpp"

namespace hjhom::testing {

// a = sin^2(pi x), H = |p|^gamma
inline EnvironmentSpec sin2_power(double gamma = 3.0) {
  EnvironmentSpec s;
  s.diffusion.family = "sin2";
  s.hamiltonian.family = "power";
  s.hamiltonian.gamma = gamma;
  return s;
}

// |p|^3 + level + amplitude * bump centred mid-component
inline EnvironmentSpec sin2_bump(double level, double amplitude, double width = 0.25) {
  EnvironmentSpec s = sin2_power(3.0);
  s.hamiltonian.potential.family = "bumps";
  s.hamiltonian.potential.level = level;
  s.hamiltonian.potential.amplitude = amplitude;
  s.hamiltonian.potential.center = 0.5;
  s.hamiltonian.potential.width = width;
  s.hamiltonian.potential.period = 1.0;
  return s;
}

inline EnvironmentSpec poisson_shot_noise(double macro_length = 10.0) {
  EnvironmentSpec s;
  s.diffusion.family = "poisson";
  s.diffusion.intensity = 1.0;
  s.diffusion.slope = 2.0;
  s.hamiltonian.family = "power";
  s.hamiltonian.gamma = 3.0;
  s.hamiltonian.linear = 0.5;
  s.hamiltonian.potential.family = "shot-noise";
  s.hamiltonian.potential.amplitude = 0.5;
  s.hamiltonian.potential.intensity = 2.0;
  s.hamiltonian.potential.width = 0.3;
  s.macro_length = macro_length;
  return s;
}

}  // namespace hjhom::testing
