#pragma once

#include "aafusion/gaussian.hpp"

#include <vector>

namespace aafusion {

/// Linear-Gaussian single-target motion with constant survival probability.
struct MotionModel {
    Matrix transition;    ///< F, for one sampling interval
    Matrix process_noise; ///< Q
    double survival_prob = 0.95;
};

/// Linear-Gaussian position measurement with Poisson clutter uniform over the ROI.
struct MeasurementModel {
    Matrix observation; ///< H (n_z x n_x)
    Matrix noise;       ///< R
    double detect_prob = 0.9;
    double clutter_rate = 10.0; ///< expected clutter returns per scan
    double roi_volume = 4.0e6;  ///< m^2

    [[nodiscard]] double clutter_density() const { return clutter_rate / roi_volume; }
};

struct BirthComponent {
    double existence = 0.03; ///< r_B: PHD weight, or Bernoulli existence for MB/LMB
    Vector mean;
    Matrix cov;
};

/// Birth GM. PHD filters read it as a Poisson intensity, MB/LMB filters as one
/// Bernoulli per component.
struct BirthModel {
    std::vector<BirthComponent> components;
};

/// Constant-velocity model on [x, vx, y, vy] with Q = q_scale * I2 (x) [[dt^2/2, dt/2], [dt/2, dt]].
MotionModel constant_velocity_model(double dt, double q_scale, double survival_prob);

/// Position-only observation of [x, vx, y, vy].
Matrix position_observation();

} // namespace aafusion
