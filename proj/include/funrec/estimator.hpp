#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "funrec/bandwidth.hpp"
#include "funrec/curve.hpp"
#include "funrec/kernel.hpp"
#include "funrec/seminorm.hpp"
#include "funrec/smallball.hpp"

namespace funrec {

using LabeledCurve = std::pair<Curve, double>;

// Response cap b_i = (delta * ln(i + 1))^{1/mu} applied to the i-th arrival.
// The shifted logarithm keeps the first threshold positive, so a sample whose
// responses all stay below every b_i is left untouched.
struct Truncation {
    double delta = 1.0;
    double mu = 1.0;

    double threshold(std::size_t i) const {
        const double base = delta * std::log(static_cast<double>(i) + 1.0);
        return mu == 1.0 ? base : std::pow(base, 1.0 / mu);
    }
};

// Full description of one estimator: the weight exponent ell in [0, 1], the
// kernel, the semi-norm on curves, the bandwidth sequence, the small-ball
// model behind the weights, and an optional response truncation.
class EstimatorConfig {
public:
    EstimatorConfig(double ell, Kernel kernel, SemiNorm seminorm, BandwidthSchedule schedule,
                    SmallBallModel smallball,
                    std::optional<Truncation> truncation = std::nullopt);

    double ell() const { return ell_; }
    const Kernel& kernel() const { return kernel_; }
    const SemiNorm& seminorm() const { return seminorm_; }
    const BandwidthSchedule& schedule() const { return schedule_; }
    const SmallBallModel& smallball() const { return smallball_; }
    const std::optional<Truncation>& truncation() const { return truncation_; }

    EstimatorConfig without_truncation() const;
    EstimatorConfig with_smallball(SmallBallModel model) const;

    std::uint64_t fingerprint() const { return fingerprint_; }
    // Fingerprint of everything except the truncation; paired truncated/plain
    // states must share it.
    std::uint64_t core_fingerprint() const { return core_fingerprint_; }

private:
    double ell_;
    Kernel kernel_;
    SemiNorm seminorm_;
    BandwidthSchedule schedule_;
    SmallBallModel smallball_;
    std::optional<Truncation> truncation_;
    std::uint64_t fingerprint_ = 0;
    std::uint64_t core_fingerprint_ = 0;
};

// Streaming sufficient statistics of the recursive estimator at a fixed set
// of evaluation points. After n updates the per-point sums equal the batch
// sums over the first n observations; that equality is the defining property
// and is what the tests pin down.
//
// One writer at a time; reads may run concurrently with no update in flight.
class EstimatorState {
public:
    std::size_t count() const { return n_; }
    std::size_t num_points() const { return slots_.size(); }
    const Curve& point(std::size_t j) const { return points_[j]; }
    const EstimatorConfig& config() const { return cfg_; }

    double numerator(std::size_t j) const { return slots_[j].num; }
    double denominator(std::size_t j) const { return slots_[j].den; }
    // Sum of F(h_i)^{1-ell} over absorbed observations.
    double normalizer() const { return norm_; }

    // Absorb one observation. Non-finite responses are rejected and leave the
    // state untouched. Cost is O(num_points * grid length).
    void update(const Curve& x, double y);

    // Ratio estimate at point j, or nothing while no observation has fallen
    // into any ball around that point. An empty denominator is a routine
    // condition, not a fault.
    std::optional<double> evaluate(std::size_t j) const;

    // Components of the ratio: f_n = den / normalizer, phi_n = num / normalizer.
    double density_component(std::size_t j) const;
    double response_component(std::size_t j) const;

    // Snapshot of {n, normalizer, per-point sums} with the config fingerprint.
    // Restoring and continuing reproduces an uninterrupted run bit for bit.
    std::string snapshot_json() const;
    static EstimatorState restore_json(const EstimatorConfig& cfg, std::vector<Curve> points,
                                       const std::string& snapshot);

    friend EstimatorState register_points(const EstimatorConfig& cfg, std::vector<Curve> points);

private:
    EstimatorState(EstimatorConfig cfg, std::vector<Curve> points);

    struct Slot {
        double num = 0.0;
        double den = 0.0;
    };

    EstimatorConfig cfg_;
    std::vector<Curve> points_;
    std::vector<Slot> slots_;
    double norm_ = 0.0;
    std::size_t n_ = 0;
};

// Fix the evaluation points ahead of streaming; updates are O(#points).
EstimatorState register_points(const EstimatorConfig& cfg, std::vector<Curve> points);

// Reference implementation: the defining ratio evaluated by a direct loop
// over the data. Ground truth for the streaming path.
std::optional<double> batch_evaluate(const EstimatorConfig& cfg,
                                     std::span<const LabeledCurve> data, const Curve& point);

// |r_truncated - r_plain| at point j for two states fed identical data, one
// configured with truncation and one without. Nothing while either ratio is
// undefined.
std::optional<double> truncated_gap(const EstimatorState& truncated, const EstimatorState& plain,
                                    std::size_t j);

}  // namespace funrec
