#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace neucogar {

struct MonoamineCoordinate {
    double serotonin = 0.5;
    double dopamine = 0.5;
    double noradrenaline = 0.5;

    void validate() const {
        for (double x : {serotonin, dopamine, noradrenaline}) {
            if (!(x >= 0.0 && x <= 1.0)) {
                throw std::invalid_argument("MonoamineCoordinate: each level must lie in [0, 1]");
            }
        }
    }

    static constexpr MonoamineCoordinate neutral() noexcept { return {0.5, 0.5, 0.5}; }

    bool operator==(const MonoamineCoordinate&) const = default;
};

/// The eight basic affects at the vertices of the monoamine cube.
enum class AffectLabel {
    EnjoymentJoy,
    InterestExcitement,
    Surprise,
    AngerRage,
    Disgust,
    DistressAnguish,
    FearTerror,
    ShameHumiliation,
};

inline constexpr std::array<AffectLabel, 8> kAllAffects = {
    AffectLabel::EnjoymentJoy,    AffectLabel::InterestExcitement, AffectLabel::Surprise,
    AffectLabel::AngerRage,       AffectLabel::Disgust,            AffectLabel::DistressAnguish,
    AffectLabel::FearTerror,      AffectLabel::ShameHumiliation};

inline std::string_view to_string(AffectLabel a) noexcept {
    switch (a) {
        case AffectLabel::EnjoymentJoy: return "ENJOYMENT_JOY";
        case AffectLabel::InterestExcitement: return "INTEREST_EXCITEMENT";
        case AffectLabel::Surprise: return "SURPRISE";
        case AffectLabel::AngerRage: return "ANGER_RAGE";
        case AffectLabel::Disgust: return "DISGUST";
        case AffectLabel::DistressAnguish: return "DISTRESS_ANGUISH";
        case AffectLabel::FearTerror: return "FEAR_TERROR";
        case AffectLabel::ShameHumiliation: return "SHAME_HUMILIATION";
    }
    return "?";
}

inline AffectLabel parse_affect(std::string_view s) {
    for (AffectLabel a : kAllAffects) {
        if (to_string(a) == s) return a;
    }
    throw std::invalid_argument("unknown affect '" + std::string(s) + "'");
}

/// Octant -> affect lookup. Octant index is (serotonin_high << 2) |
/// (dopamine_high << 1) | noradrenaline_high, with an axis "high" when its
/// level is strictly above 0.5.
struct AffectTable {
    std::array<AffectLabel, 8> by_octant{};

    static constexpr std::size_t octant(bool serotonin_high, bool dopamine_high,
                                        bool noradrenaline_high) noexcept {
        return (static_cast<std::size_t>(serotonin_high) << 2) |
               (static_cast<std::size_t>(dopamine_high) << 1) |
               static_cast<std::size_t>(noradrenaline_high);
    }

    static std::size_t octant(const MonoamineCoordinate& c) noexcept {
        return octant(c.serotonin > 0.5, c.dopamine > 0.5, c.noradrenaline > 0.5);
    }

    /// Default vertex assignment, axes (5-HT, DA, NE). Fear sits on the
    /// low-serotonin, high-dopamine, high-noradrenaline vertex.
    static AffectTable defaults() noexcept {
        using A = AffectLabel;
        return AffectTable{{A::ShameHumiliation, A::DistressAnguish, A::AngerRage, A::FearTerror,
                            A::Disgust, A::Surprise, A::EnjoymentJoy, A::InterestExcitement}};
    }

    /// Every label must appear exactly once.
    void validate() const {
        std::array<int, 8> seen{};
        for (AffectLabel a : by_octant) ++seen[static_cast<std::size_t>(a)];
        for (int n : seen) {
            if (n != 1) throw std::invalid_argument("AffectTable: must be a bijection over octants");
        }
    }

    bool operator==(const AffectTable&) const = default;
};

inline AffectLabel classify_affect(const MonoamineCoordinate& coord, const AffectTable& table) {
    coord.validate();
    return table.by_octant[AffectTable::octant(coord)];
}

/// The five computing-system parameters.
struct MetricsVector {
    double computing_utilization = 0.0;
    double computing_distribution = 0.0;
    double memory_distribution = 0.0;
    double storage_volume = 0.0;
    double storage_bandwidth = 0.0;

    static constexpr std::array<std::string_view, 5> kNames = {
        "computing_utilization", "computing_distribution", "memory_distribution",
        "storage_volume", "storage_bandwidth"};

    Eigen::Matrix<double, 5, 1> as_vector() const {
        Eigen::Matrix<double, 5, 1> v;
        v << computing_utilization, computing_distribution, memory_distribution, storage_volume,
            storage_bandwidth;
        return v;
    }

    static MetricsVector from_vector(const Eigen::Matrix<double, 5, 1>& v) {
        return {v(0), v(1), v(2), v(3), v(4)};
    }

    bool operator==(const MetricsVector&) const = default;
};

/// 5x3 influence matrix; rows follow MetricsVector, columns are
/// (serotonin, dopamine, noradrenaline).
using InfluenceMatrix = Eigen::MatrixXd;

inline InfluenceMatrix default_influence_matrix() {
    InfluenceMatrix m(5, 3);
    //   5-HT  DA   NE
    m << 1.0, 1.0, 0.0,   // computing utilization
         0.0, 0.0, 1.0,   // computing distribution
         0.0, 0.0, 1.0,   // memory distribution
         1.0, 1.0, 0.0,   // storage volume
         1.0, 0.0, 0.0;   // storage bandwidth
    return m;
}

namespace detail {
inline void check_shape(const InfluenceMatrix& m) {
    if (m.rows() != 5 || m.cols() != 3) {
        throw std::invalid_argument("influence matrix must be 5x3, got " + std::to_string(m.rows()) +
                                    "x" + std::to_string(m.cols()));
    }
    if (!m.allFinite()) throw std::invalid_argument("influence matrix has non-finite entries");
}
}  // namespace detail

/// Metric deltas produced by a monoamine state, relative to the neutral point.
inline MetricsVector monoamines_to_metric_deltas(const MonoamineCoordinate& coord,
                                                 const InfluenceMatrix& m) {
    detail::check_shape(m);
    coord.validate();
    const auto n = MonoamineCoordinate::neutral();
    Eigen::Vector3d x(coord.serotonin - n.serotonin, coord.dopamine - n.dopamine,
                      coord.noradrenaline - n.noradrenaline);
    const Eigen::Matrix<double, 5, 1> d = m * x;
    return MetricsVector::from_vector(d);
}

/// Least-squares monoamine state explaining observed metric deltas,
/// clamped to the unit cube.
inline MonoamineCoordinate metric_deltas_to_monoamines(const MetricsVector& deltas,
                                                       const InfluenceMatrix& m) {
    detail::check_shape(m);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    if (qr.rank() < 3) {
        throw std::invalid_argument("influence matrix is rank deficient (rank " +
                                    std::to_string(qr.rank()) + " < 3); inverse mapping undefined");
    }
    const Eigen::VectorXd x = qr.solve(Eigen::VectorXd(deltas.as_vector()));
    const auto n = MonoamineCoordinate::neutral();
    auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
    return {unit(n.serotonin + x(0)), unit(n.dopamine + x(1)), unit(n.noradrenaline + x(2))};
}

}  // namespace neucogar
