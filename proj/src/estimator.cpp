#include "funrec/estimator.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

#include "funrec/errors.hpp"
#include "funrec/numeric.hpp"

namespace funrec {

namespace {

double pow_fast(double base, double exponent) {
    if (exponent == 0.0) return 1.0;
    if (exponent == 1.0) return base;
    return std::pow(base, exponent);
}

void fingerprint_double(std::string& buf, double v) {
    buf += format_double(v);
    buf += ';';
}

std::uint64_t config_fingerprint(double ell, const Kernel& kernel, const SemiNorm& seminorm,
                                 const BandwidthSchedule& schedule, const SmallBallModel& smallball,
                                 const std::optional<Truncation>& truncation) {
    std::string buf;
    buf.reserve(256);
    fingerprint_double(buf, ell);
    buf += to_string(kernel.kind());
    buf += ';';
    if (kernel.kind() == KernelKind::Custom) {
        for (double t : kernel.table_abscissae()) fingerprint_double(buf, t);
        for (double v : kernel.table_values()) fingerprint_double(buf, v);
    }
    buf += to_string(seminorm.kind);
    buf += ';';
    fingerprint_double(buf, schedule.h1());
    fingerprint_double(buf, schedule.decay());
    if (smallball.kind() == SmallBallKind::PowerLaw) {
        buf += "pl;";
        fingerprint_double(buf, smallball.c());
        fingerprint_double(buf, smallball.gamma());
        fingerprint_double(buf, smallball.valid_up_to());
    } else {
        buf += "emp;";
        for (double d : smallball.pilot_distances()) fingerprint_double(buf, d);
    }
    if (truncation) {
        buf += "tr;";
        fingerprint_double(buf, truncation->delta);
        fingerprint_double(buf, truncation->mu);
    }
    return fnv1a(buf.data(), buf.size());
}

// Per-arrival ingredients shared by the streaming and batch paths. Keeping
// them in one place makes the two paths agree term by term.
struct TermWeights {
    double h = 0.0;
    double inv_weight_ell = 0.0;  // 1 / F(h_i)^ell
    double weight_norm = 0.0;     // F(h_i)^{1-ell}
    double cap = 0.0;             // truncation threshold, infinity when absent
};

TermWeights term_weights(const EstimatorConfig& cfg, std::size_t i) {
    TermWeights t;
    t.h = cfg.schedule().h(i);
    const double w = cfg.smallball()(t.h);
    if (!(w > 0.0))
        throw DomainError("estimator: small-ball mass vanishes at h_" + std::to_string(i) +
                          "; the model and the bandwidth schedule are inconsistent");
    t.inv_weight_ell = 1.0 / pow_fast(w, cfg.ell());
    t.weight_norm = pow_fast(w, 1.0 - cfg.ell());
    t.cap = cfg.truncation() ? cfg.truncation()->threshold(i)
                             : std::numeric_limits<double>::infinity();
    return t;
}

}  // namespace

EstimatorConfig::EstimatorConfig(double ell, Kernel kernel, SemiNorm seminorm,
                                 BandwidthSchedule schedule, SmallBallModel smallball,
                                 std::optional<Truncation> truncation)
    : ell_(ell),
      kernel_(std::move(kernel)),
      seminorm_(seminorm),
      schedule_(schedule),
      smallball_(std::move(smallball)),
      truncation_(truncation) {
    if (!(ell_ >= 0.0 && ell_ <= 1.0))
        throw ValidationError("EstimatorConfig: ell must lie in [0, 1]");
    if (!(kernel_.infimum() > 0.0))
        throw ValidationError(
            "EstimatorConfig: estimation requires a kernel bounded away from zero on [0, 1]");
    if (truncation_) {
        if (!(truncation_->delta > 0.0) || !(truncation_->mu > 0.0))
            throw ValidationError("EstimatorConfig: truncation constants must be positive");
    }
    fingerprint_ =
        config_fingerprint(ell_, kernel_, seminorm_, schedule_, smallball_, truncation_);
    core_fingerprint_ =
        config_fingerprint(ell_, kernel_, seminorm_, schedule_, smallball_, std::nullopt);
}

EstimatorConfig EstimatorConfig::without_truncation() const {
    return EstimatorConfig(ell_, kernel_, seminorm_, schedule_, smallball_, std::nullopt);
}

EstimatorConfig EstimatorConfig::with_smallball(SmallBallModel model) const {
    return EstimatorConfig(ell_, kernel_, seminorm_, schedule_, std::move(model), truncation_);
}

EstimatorState::EstimatorState(EstimatorConfig cfg, std::vector<Curve> points)
    : cfg_(std::move(cfg)), points_(std::move(points)), slots_(points_.size()) {}

EstimatorState register_points(const EstimatorConfig& cfg, std::vector<Curve> points) {
    if (points.empty()) throw ValidationError("register_points: need at least one point");
    for (std::size_t j = 1; j < points.size(); ++j) require_same_grid(points[0], points[j]);
    return EstimatorState(cfg, std::move(points));
}

void EstimatorState::update(const Curve& x, double y) {
    if (!std::isfinite(y)) throw DomainError("update: non-finite response rejected");
    require_same_grid(points_[0], x);

    const std::size_t i = n_ + 1;
    const TermWeights t = term_weights(cfg_, i);
    const double y_eff = std::abs(y) <= t.cap ? y : 0.0;

    for (std::size_t j = 0; j < points_.size(); ++j) {
        const double dist = cfg_.seminorm().distance(points_[j], x);
        const double u = dist / t.h;
        if (u > 1.0) continue;
        const double k = cfg_.kernel()(u);
        if (k == 0.0) continue;
        const double kw = k * t.inv_weight_ell;
        slots_[j].den += kw;
        slots_[j].num += y_eff * kw;
    }
    norm_ += t.weight_norm;
    n_ = i;
}

std::optional<double> EstimatorState::evaluate(std::size_t j) const {
    if (j >= slots_.size()) throw StructuralError("evaluate: point index out of range");
    if (!(slots_[j].den > 0.0)) return std::nullopt;
    return slots_[j].num / slots_[j].den;
}

double EstimatorState::density_component(std::size_t j) const {
    if (j >= slots_.size()) throw StructuralError("density_component: point index out of range");
    if (n_ == 0) throw DomainError("density_component: no observations absorbed yet");
    return slots_[j].den / norm_;
}

double EstimatorState::response_component(std::size_t j) const {
    if (j >= slots_.size()) throw StructuralError("response_component: point index out of range");
    if (n_ == 0) throw DomainError("response_component: no observations absorbed yet");
    return slots_[j].num / norm_;
}

std::string EstimatorState::snapshot_json() const {
    nlohmann::json j;
    j["format"] = "funrec-state-v1";
    j["config"] = cfg_.fingerprint();
    j["n"] = n_;
    j["norm"] = norm_;
    nlohmann::json pts = nlohmann::json::array();
    for (const Slot& s : slots_) pts.push_back({s.num, s.den});
    j["points"] = std::move(pts);
    return j.dump();
}

EstimatorState EstimatorState::restore_json(const EstimatorConfig& cfg, std::vector<Curve> points,
                                            const std::string& snapshot) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(snapshot);
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("restore: malformed snapshot: ") + e.what());
    }
    if (!j.is_object() || j.value("format", std::string{}) != "funrec-state-v1")
        throw StructuralError("restore: unrecognized snapshot format");
    if (j.at("config").get<std::uint64_t>() != cfg.fingerprint())
        throw StructuralError("restore: snapshot was taken under a different configuration");
    EstimatorState state = register_points(cfg, std::move(points));
    const auto& pts = j.at("points");
    if (pts.size() != state.slots_.size())
        throw StructuralError("restore: snapshot point count does not match");
    for (std::size_t k = 0; k < state.slots_.size(); ++k) {
        state.slots_[k].num = pts[k][0].get<double>();
        state.slots_[k].den = pts[k][1].get<double>();
    }
    state.norm_ = j.at("norm").get<double>();
    state.n_ = j.at("n").get<std::size_t>();
    return state;
}

std::optional<double> batch_evaluate(const EstimatorConfig& cfg,
                                     std::span<const LabeledCurve> data, const Curve& point) {
    if (data.empty()) throw ValidationError("batch_evaluate: empty dataset");
    double num = 0.0;
    double den = 0.0;
    for (std::size_t idx = 0; idx < data.size(); ++idx) {
        const std::size_t i = idx + 1;
        const auto& [x, y] = data[idx];
        if (!std::isfinite(y)) throw DomainError("batch_evaluate: non-finite response");
        const TermWeights t = term_weights(cfg, i);
        const double y_eff = std::abs(y) <= t.cap ? y : 0.0;
        const double dist = cfg.seminorm().distance(point, x);
        const double u = dist / t.h;
        if (u > 1.0) continue;
        const double k = cfg.kernel()(u);
        if (k == 0.0) continue;
        const double kw = k * t.inv_weight_ell;
        den += kw;
        num += y_eff * kw;
    }
    if (!(den > 0.0)) return std::nullopt;
    return num / den;
}

std::optional<double> truncated_gap(const EstimatorState& truncated, const EstimatorState& plain,
                                    std::size_t j) {
    if (!truncated.config().truncation() || plain.config().truncation())
        throw StructuralError("truncated_gap: expects one truncated and one plain state");
    if (truncated.config().core_fingerprint() != plain.config().core_fingerprint())
        throw StructuralError("truncated_gap: states were built from different configurations");
    if (truncated.count() != plain.count() || truncated.num_points() != plain.num_points())
        throw StructuralError("truncated_gap: states absorbed different data");
    const auto a = truncated.evaluate(j);
    const auto b = plain.evaluate(j);
    if (!a || !b) return std::nullopt;
    return std::abs(*a - *b);
}

}  // namespace funrec
