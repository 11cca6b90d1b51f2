#include "ddc/simkit.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace ddc {

Eigen::VectorXd uav_field(const Eigen::VectorXd& s, const Eigen::VectorXd& u, const UavParams& p) {
    if (s.size() != 4 || u.size() != 2) throw std::invalid_argument("uav_field: expects 4 states and 2 inputs");
    Eigen::VectorXd x1(1);
    x1(0) = s(0);
    const double vw = p.wind.eval(x1);
    const double vy = s(3) + vw;
    Eigen::VectorXd d(4);
    d << s(2), s(3), p.c_d * (s(2) * s(2) + vy * vy) + u(0), p.c_w * vw + u(1);
    return d;
}

PolyVecd uav_nominal_field(double c_d) {
    const Poly vx = Poly::variable(4, 2);
    const Poly vy = Poly::variable(4, 3);
    return PolyVecd({vx, vy, c_d * (vx * vx + vy * vy), Poly(4)});
}

Plant uav_plant(const UavParams& params) {
    if (params.wind.dim() != 1) throw std::invalid_argument("uav_plant: wind must be a polynomial in x only");
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(4, 2);
    B(2, 0) = 1.0;
    B(3, 1) = 1.0;
    return {[params](const Eigen::VectorXd& x) { return uav_field(x, Eigen::VectorXd::Zero(2), params); }, B};
}

Plant polynomial_plant(const PolyVecd& f, const Eigen::MatrixXd& B) {
    if (f.size() != f.dim() || B.rows() != f.size()) throw std::invalid_argument("polynomial_plant: dimension mismatch");
    return {[f](const Eigen::VectorXd& x) { return f.eval(x); }, B};
}

void validate_sim_config(const SimConfig& c, const CompactSet& K) {
    if (!(c.dt > 0.0)) throw std::invalid_argument("sim: dt must be > 0");
    if (!(c.horizon >= c.dt)) throw std::invalid_argument("sim: horizon must be >= dt");
    if (c.x0.size() != K.dim()) throw std::invalid_argument("sim: x0 has wrong dimension");
    if (c.gain.cols() != K.dim()) throw std::invalid_argument("sim: gain has wrong column count");
    if (c.estimate_error_radius < 0.0 || c.estimate_error_radius > K.radius()) {
        throw std::invalid_argument("sim: estimate_error_radius must lie in [0, radius of K]");
    }
    if (c.realizations < 1) throw std::invalid_argument("sim: realizations must be >= 1");
}

namespace {

int step_count(double dt, double horizon) { return static_cast<int>(std::llround(horizon / dt)); }

template <typename F>
Eigen::VectorXd rk4_step(const F& f, const Eigen::VectorXd& x, double dt) {
    const Eigen::VectorXd k1 = f(x);
    const Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = f(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace

Trajectory integrate(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& field, const Eigen::VectorXd& x0,
                     double dt, double horizon) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
    const int steps = step_count(dt, horizon);
    Trajectory tr;
    tr.times.reserve(static_cast<std::size_t>(steps) + 1);
    tr.states.reserve(static_cast<std::size_t>(steps) + 1);
    Eigen::VectorXd x = x0;
    for (int i = 0;; ++i) {
        tr.times.push_back(i * dt);
        tr.states.push_back(x);
        if (i == steps) break;
        x = rk4_step(field, x, dt);
        if (!x.allFinite()) {
            tr.diverged = true;
            break;
        }
    }
    return tr;
}

Trajectory closed_loop(const Plant& plant, const SimConfig& c, const CompactSet& K, SplitMix64& rng) {
    const int n = static_cast<int>(c.x0.size());
    if (plant.B.rows() != n || c.gain.rows() != plant.B.cols() || c.gain.cols() != n) {
        throw std::invalid_argument("closed_loop: gain dimensions do not match the plant");
    }
    const int steps = step_count(c.dt, c.horizon);
    Trajectory tr;
    tr.times.reserve(static_cast<std::size_t>(steps) + 1);
    tr.states.reserve(static_cast<std::size_t>(steps) + 1);
    tr.controls.reserve(static_cast<std::size_t>(steps) + 1);
    Eigen::VectorXd x = c.x0;
    for (int i = 0;; ++i) {
        const Eigen::VectorXd e =
            c.estimate_error_radius > 0.0 ? rng.uniform_ball(n, c.estimate_error_radius) : Eigen::VectorXd::Zero(n);
        const bool inside = K.contains(x);
        auto control = [&](const Eigen::VectorXd& xs) -> Eigen::VectorXd {
            Eigen::VectorXd xbar = xs + e;
            if (inside) xbar = K.project(xbar);
            return c.gain * xbar;
        };
        tr.times.push_back(i * c.dt);
        tr.states.push_back(x);
        tr.controls.push_back(control(x));
        if (i == steps) break;
        x = rk4_step([&](const Eigen::VectorXd& xs) { return Eigen::VectorXd(plant.drift(xs) + plant.B * control(xs)); },
                     x, c.dt);
        if (!x.allFinite()) {
            tr.diverged = true;
            break;
        }
    }
    return tr;
}

Trajectory closed_loop(const UavParams& params, const Eigen::MatrixXd& G, const SimConfig& config, const CompactSet& K) {
    SimConfig c = config;
    c.gain = G;
    SplitMix64 rng = SplitMix64::stream(c.seed, 0);
    return closed_loop(uav_plant(params), c, K, rng);
}

PlantSampler uniform_wind_sampler(const UavParams& base, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("uniform_wind_sampler: empty range");
    return [base, lo, hi](SplitMix64& rng) {
        UavParams p = base;
        const double w = rng.uniform(lo, hi);
        p.wind = Poly::constant(1, w);
        return Perturbation{uav_plant(p), w};
    };
}

PlantSampler polynomial_wind_sampler(const UavParams& base, int degree, double bound, double x_lo, double x_hi) {
    if (degree < 0 || degree > kMaxPolynomialDegree) throw std::invalid_argument("polynomial_wind_sampler: bad degree");
    if (!(x_lo < x_hi) || bound < 0.0) throw std::invalid_argument("polynomial_wind_sampler: bad range");
    return [base, degree, bound, x_lo, x_hi](SplitMix64& rng) {
        // Coefficients in the centered variable s = (x - mid) / half, |s| <= 1.
        const double mid = 0.5 * (x_lo + x_hi);
        const double half = 0.5 * (x_hi - x_lo);
        std::vector<double> c(static_cast<std::size_t>(degree) + 1);
        double total = 0.0;
        for (auto& v : c) {
            v = rng.uniform(-1.0, 1.0);
            total += std::abs(v);
        }
        const double scale = total > 0.0 ? bound / total : 0.0;
        const Poly s = (1.0 / half) * (Poly::variable(1, 0) - Poly::constant(1, mid));
        Poly w = Poly::constant(1, 0.0);
        Poly power = Poly::constant(1, 1.0);
        for (int k = 0; k <= degree; ++k) {
            w += (scale * c[static_cast<std::size_t>(k)]) * power;
            if (k < degree) power = power * s;
        }
        UavParams p = base;
        p.wind = w;
        return Perturbation{uav_plant(p), scale * c[0]};
    };
}

PlantSampler fixed_plant_sampler(const Plant& plant) {
    return [plant](SplitMix64&) { return Perturbation{plant, 0.0}; };
}

Realization run_realization(const Plant& plant, const SimConfig& config, const CompactSet& K,
                            const Trajectory& nominal, const Eigen::VectorXd& x0, double gamma, SplitMix64& rng) {
    SimConfig c = config;
    c.x0 = x0;
    Realization r;
    r.x0 = x0;
    r.trajectory = closed_loop(plant, c, K, rng);
    const std::size_t len = std::min(r.trajectory.states.size(), nominal.states.size());
    r.deviation.reserve(len);
    r.envelope.reserve(len);
    r.d0 = (r.trajectory.states[0] - nominal.states[0]).lpNorm<Eigen::Infinity>();
    bool checking = true;
    for (std::size_t i = 0; i < len; ++i) {
        const double t = nominal.times[i];
        const double dev = (r.trajectory.states[i] - nominal.states[i]).lpNorm<Eigen::Infinity>();
        const double env = deviation_envelope(r.d0, gamma, t);
        r.deviation.push_back(dev);
        r.envelope.push_back(env);
        if (!checking) continue;
        if (!K.contains(r.trajectory.states[i]) || !K.contains(nominal.states[i])) {
            checking = false;
            r.left_k = true;
            continue;
        }
        r.checked_until = t;
        const double excess = dev - env - kEnvelopeSlack;
        if (excess > 0.0) ++r.violation_samples;
    }
    if (r.trajectory.diverged || len < nominal.states.size()) r.left_k = true;
    return r;
}

DeviationReport monte_carlo(const Plant& nominal, const PlantSampler& sampler, const SimConfig& config,
                            const CompactSet& K, double gamma, unsigned workers) {
    validate_sim_config(config, K);
    DeviationReport rep;
    rep.gamma = gamma;
    {
        SplitMix64 rng = SplitMix64::stream(config.seed, 0);
        rep.nominal = closed_loop(nominal, config, K, rng);
    }
    const int count = config.realizations;
    rep.realizations.resize(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto work = [&]() {
        for (int i = next++; i < count; i = next++) {
            SplitMix64 rng = SplitMix64::stream(config.seed, static_cast<std::uint64_t>(i) + 1);
            const Eigen::VectorXd x0 = K.center() + rng.uniform_ball(K.dim(), K.radius());
            const Perturbation pert = sampler(rng);
            Realization r = run_realization(pert.plant, config, K, rep.nominal, x0, gamma, rng);
            r.wind = pert.wind;
            rep.realizations[static_cast<std::size_t>(i)] = std::move(r);
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }
    for (int i = 0; i < count; ++i) {
        const Realization& r = rep.realizations[static_cast<std::size_t>(i)];
        if (r.left_k) ++rep.inconclusive;
        if (r.violation_samples == 0) continue;
        Violation v{i, 0.0, -std::numeric_limits<double>::infinity()};
        for (std::size_t k = 0; k < r.deviation.size(); ++k) {
            if (rep.nominal.times[k] > r.checked_until) break;
            const double excess = r.deviation[k] - r.envelope[k] - kEnvelopeSlack;
            if (excess > v.excess) {
                v.excess = excess;
                v.time = rep.nominal.times[k];
            }
        }
        rep.violations.push_back(v);
    }
    return rep;
}

DecayFit fit_decay_rate(const Trajectory& nominal) {
    DecayFit fit;
    const std::size_t len = nominal.states.size();
    if (len < 4) {
        fit.reason = "nominal trajectory too short";
        return fit;
    }
    const double r0 = nominal.states[0].norm();
    if (!(r0 > 0.0)) {
        fit.reason = "nominal trajectory starts at the origin";
        return fit;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (std::size_t i = len / 2; i < len; ++i) {
        const double r = nominal.states[i].norm();
        if (!(r > 0.0) || !std::isfinite(r)) continue;
        const double t = nominal.times[i];
        const double y = std::log(r);
        sx += t;
        sy += y;
        sxx += t * t;
        sxy += t * y;
        ++cnt;
    }
    if (cnt < 2) {
        fit.reason = "no usable tail samples";
        return fit;
    }
    const double den = cnt * sxx - sx * sx;
    fit.regression = -(cnt * sxy - sx * sy) / den;
    fit.cap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < len; ++i) {
        const double r = nominal.states[i].norm();
        if (!(r > 0.0)) continue;
        fit.cap = std::min(fit.cap, -std::log(r / r0) / nominal.times[i]);
    }
    fit.alpha = std::min(fit.regression, fit.cap);
    // A rate whose total decay over the horizon is below round-off is a flat tail.
    fit.ok = std::isfinite(fit.alpha) && fit.alpha * nominal.times.back() > kMinDecayExponent && !nominal.diverged;
    if (!fit.ok) fit.reason = "nominal trajectory is not decaying";
    return fit;
}

StabilityCheck robust_stability_check(const DeviationReport& report, double gamma) {
    StabilityCheck chk;
    chk.fit = fit_decay_rate(report.nominal);
    if (!chk.fit.ok) return chk;
    chk.conclusive = true;
    chk.rate = std::min(chk.fit.alpha, std::abs(gamma));
    const Eigen::VectorXd& xn0 = report.nominal.states.front();
    chk.all_pass = true;
    for (const auto& r : report.realizations) {
        const auto& states = r.trajectory.states;
        const double c = (states.front() - xn0).norm() + states.front().norm();
        double worst = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < states.size(); ++i) {
            const double bound = c * std::exp(-chk.rate * r.trajectory.times[i]) + kEnvelopeSlack;
            worst = std::max(worst, states[i].norm() - bound);
        }
        const bool ok = worst <= 0.0 && !r.trajectory.diverged;
        chk.pass.push_back(ok);
        chk.worst_excess.push_back(worst);
        chk.all_pass = chk.all_pass && ok;
    }
    return chk;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& tr, int stride) {
    if (stride < 1) throw std::invalid_argument("write_trajectory_csv: stride must be >= 1");
    const int n = tr.states.empty() ? 0 : static_cast<int>(tr.states.front().size());
    const int m = tr.controls.empty() ? 0 : static_cast<int>(tr.controls.front().size());
    os << 't';
    if (n == 4 && m == 2) {
        os << ",x,y,xdot,ydot,u1,u2";
    } else {
        for (int i = 0; i < n; ++i) os << ",x" << i + 1;
        for (int i = 0; i < m; ++i) os << ",u" << i + 1;
    }
    os << '\n';
    for (std::size_t k = 0; k < tr.states.size(); k += static_cast<std::size_t>(stride)) {
        os << format_double(tr.times[k]);
        for (int i = 0; i < n; ++i) os << ',' << format_double(tr.states[k](i));
        for (int i = 0; i < m; ++i) os << ',' << format_double(tr.controls[k](i));
        os << '\n';
    }
}

void write_deviation_csv(std::ostream& os, const DeviationReport& report, int stride) {
    if (stride < 1) throw std::invalid_argument("write_deviation_csv: stride must be >= 1");
    os << "t,dev_inf,envelope,realization\n";
    for (std::size_t r = 0; r < report.realizations.size(); ++r) {
        const Realization& real = report.realizations[r];
        for (std::size_t k = 0; k < real.deviation.size(); k += static_cast<std::size_t>(stride)) {
            os << format_double(report.nominal.times[k]) << ',' << format_double(real.deviation[k]) << ','
               << format_double(real.envelope[k]) << ',' << r << '\n';
        }
    }
}

}  // namespace ddc
