#include "ipid/information.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "ipid/error.hpp"

namespace ipid {

DetectorKind parse_detector_kind(const std::string& name) {
  if (name == "shiryaev") return DetectorKind::shiryaev;
  if (name == "robust_shiryaev" || name == "robust") return DetectorKind::robust_shiryaev;
  if (name == "cusum") return DetectorKind::cusum;
  if (name == "mps") return DetectorKind::mps;
  if (name == "msps") return DetectorKind::msps;
  if (name == "classifier") return DetectorKind::classifier;
  fail(ErrorCode::parse, "unknown detector kind \"" + name + "\"");
}

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::shiryaev: return "shiryaev";
    case DetectorKind::robust_shiryaev: return "robust_shiryaev";
    case DetectorKind::cusum: return "cusum";
    case DetectorKind::mps: return "mps";
    case DetectorKind::msps: return "msps";
    case DetectorKind::classifier: return "classifier";
  }
  return "unknown";
}

bool is_bayesian(DetectorKind kind) noexcept {
  return kind == DetectorKind::shiryaev || kind == DetectorKind::robust_shiryaev ||
         kind == DetectorKind::mps || kind == DetectorKind::msps;
}

namespace {

std::vector<double> slot_kls(const IpidLaw& pre, const IpidLaw& post) {
  require(pre.period() == post.period(), ErrorCode::period_mismatch,
          "information number needs laws with equal periods");
  std::vector<double> out(pre.period());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kl(post.slot(i), pre.slot(i));
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double info_number(const IpidLaw& pre, const IpidLaw& post) { return mean_of(slot_kls(pre, post)); }

InfoReport info_report(const IpidLaw& pre, const IpidLaw& post) {
  auto kls = slot_kls(pre, post);
  const double aggregate = mean_of(kls);
  return {std::move(kls), aggregate, "I = mean_i D(g_i||f_i); delay ~ |ln alpha|/(I+d) or ln beta/I"};
}

InfoReport info_multislot_report(const MultislotFamily& fam, const Subset& s) {
  const auto& chosen = fam.candidates()[fam.index_of(s)];
  std::vector<double> kls(fam.period(), 0.0);
  for (std::size_t i : chosen) kls[i] = kl(fam.base_post().slot(i), fam.base_pre().slot(i));
  const double aggregate = mean_of(kls);
  return {std::move(kls), aggregate, "I_S = (1/T) sum_{i in S} D(g_i||f_i); delay ~ |ln alpha|/(I_S+d)"};
}

double info_multislot(const MultislotFamily& fam, const Subset& s) {
  return info_multislot_report(fam, s).aggregate;
}

double info_multistream(const MultistreamConfig& cfg, const Subset& b) {
  const auto& chosen = cfg.candidates()[cfg.index_of(b)];
  double total = 0.0;
  for (std::size_t l : chosen) total += info_number(cfg.streams()[l].pre, cfg.streams()[l].post);
  return total;
}

InfoMatrix info_matrix(const ClassBank& bank) {
  const std::size_t M = bank.classes();
  const std::size_t T = bank.period();
  InfoMatrix out;
  out.entries.assign(M + 1, std::vector<double>(M + 1, 0.0));
  out.i_star = std::numeric_limits<double>::infinity();
  for (std::size_t l = 1; l <= M; ++l) {
    for (std::size_t m = 0; m <= M; ++m) {
      if (m == l) continue;
      double sum = 0.0;
      for (std::size_t i = 0; i < T; ++i) {
        const auto& gl = bank.law(l).slot(i);
        const auto& gm = bank.law(m).slot(i);
        require(gl.same_family(gm), ErrorCode::unsupported_pair,
                "class bank mixes density families on slot " + std::to_string(i));
        if (bank.slot_active(i)) sum += kl(gl, gm);
      }
      const double value = sum / static_cast<double>(T);
      out.entries[l][m] = value;
      if (value < out.i_star) {
        out.i_star = value;
        out.argmin_class = l;
        out.argmin_other = m;
      }
    }
  }
  return out;
}

double threshold_for(DetectorKind kind, double budget, std::size_t classes) {
  if (is_bayesian(kind)) {
    require(budget > 0.0 && budget < 1.0, ErrorCode::invalid_argument,
            "false-alarm probability alpha must lie in (0, 1)");
    if (kind == DetectorKind::mps || kind == DetectorKind::msps) return (1.0 - budget) / budget;
    return 1.0 - budget;
  }
  require(budget > 1.0 && std::isfinite(budget), ErrorCode::invalid_argument,
          "mean time to false alarm beta must exceed 1");
  if (kind == DetectorKind::classifier) {
    require(classes >= 1, ErrorCode::invalid_argument, "classifier needs M >= 1");
    return std::log(4.0 * static_cast<double>(classes) * budget);
  }
  return std::log(budget);
}

double asymptotic_delay(DetectorKind kind, double budget, double info, double d) {
  require(info > 0.0 && std::isfinite(info), ErrorCode::invalid_argument,
          "delay prediction needs a positive information number");
  if (is_bayesian(kind)) {
    require(budget > 0.0 && budget < 1.0, ErrorCode::invalid_argument,
            "false-alarm probability alpha must lie in (0, 1)");
    require(d >= 0.0, ErrorCode::invalid_argument, "tail exponent must be >= 0");
    return std::abs(std::log(budget)) / (info + d);
  }
  require(budget > 1.0, ErrorCode::invalid_argument, "beta must exceed 1");
  return std::log(budget) / info;
}

long long window_size(double beta, double i_star, double epsilon) {
  require(beta > 1.0 && i_star > 0.0 && epsilon > 0.0, ErrorCode::invalid_argument,
          "window size needs beta > 1, I* > 0, eps > 0");
  // Relative slack absorbs rounding in ln(beta)/I* at exact integers.
  const double raw = (1.0 + epsilon) * std::log(beta) / i_star;
  const auto window = static_cast<long long>(std::ceil(raw * (1.0 - 1e-12)));
  return std::max<long long>(1, window);
}

void to_json(nlohmann::json& j, const InfoReport& r) {
  j = {{"per_slot_kl", r.per_slot_kl}, {"aggregate", r.aggregate}, {"formula_id", r.formula_id}};
}

void from_json(const nlohmann::json& j, InfoReport& r) {
  r.per_slot_kl = j.at("per_slot_kl").get<std::vector<double>>();
  r.aggregate = j.at("aggregate").get<double>();
  r.formula_id = j.at("formula_id").get<std::string>();
}

void to_json(nlohmann::json& j, const InfoMatrix& m) {
  j = {{"entries", m.entries},
       {"i_star", m.i_star},
       {"argmin", {m.argmin_class, m.argmin_other}}};
}

}  // namespace ipid
