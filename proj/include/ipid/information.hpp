#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "ipid/model.hpp"

namespace ipid {

enum class DetectorKind { shiryaev, robust_shiryaev, cusum, mps, msps, classifier };

DetectorKind parse_detector_kind(const std::string& name);
std::string to_string(DetectorKind kind);
/// Shiryaev-type rules are budgeted by a false-alarm probability alpha.
bool is_bayesian(DetectorKind kind) noexcept;

/// Per-slot KL terms and the aggregate they feed.
struct InfoReport {
  std::vector<double> per_slot_kl;
  double aggregate = 0.0;
  std::string formula_id;
};

/// I = (1/T) sum_i D(g_i || f_i).
double info_number(const IpidLaw& pre, const IpidLaw& post);
InfoReport info_report(const IpidLaw& pre, const IpidLaw& post);

/// I_S = (1/T) sum_{i in S} D(g_i || f_i).
double info_multislot(const MultislotFamily& fam, const Subset& s);
InfoReport info_multislot_report(const MultislotFamily& fam, const Subset& s);

/// I_B = sum_{l in B} (1/T) sum_i D(g_{i,l} || f_{i,l}).
double info_multistream(const MultistreamConfig& cfg, const Subset& b);

struct InfoMatrix {
  /// entries[l][m] = I_{lm} for 1 <= l <= M, 0 <= m <= M, m != l. Row 0 and the diagonal are unused (0).
  std::vector<std::vector<double>> entries;
  double i_star = 0.0;
  std::size_t argmin_class = 0;
  std::size_t argmin_other = 0;
};

/// Cross-class information numbers over the bank's active slots.
InfoMatrix info_matrix(const ClassBank& bank);

/// Threshold from a false-alarm budget: 1 - alpha (Shiryaev), (1 - alpha)/alpha (MPS, MSPS),
/// ln beta (CUSUM), ln(4 M beta) (classifier).
double threshold_for(DetectorKind kind, double budget, std::size_t classes = 1);

/// First-order delay: |ln alpha| / (info + d) for the Bayesian rules, ln beta / info otherwise.
double asymptotic_delay(DetectorKind kind, double budget, double info, double d = 0.0);

/// ceil((1 + eps) ln(beta) / I*), at least 1.
long long window_size(double beta, double i_star, double epsilon);

void to_json(nlohmann::json& j, const InfoReport& r);
void from_json(const nlohmann::json& j, InfoReport& r);
void to_json(nlohmann::json& j, const InfoMatrix& m);

}  // namespace ipid
