#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "stolz/estimator.hpp"
#include "stolz/recursion.hpp"

namespace stolz {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";

inline constexpr const char* kDisclaimer =
    "empirical over prefix n_max: every condition was checked only for indices "
    "n <= n_max; this is numerical evidence for the limit, not a proof";

namespace detail {

template <typename T>
Json optional_json(const std::optional<T>& value) {
  return value ? Json(*value) : Json(nullptr);
}

}  // namespace detail

inline Json to_json(const PositivityCheck& check) {
  if (check.passed()) return "pass";
  return Json{{"first_violation_index", *check.first_violation}};
}

inline Json to_json(const DivergenceCheck& check) {
  using S = DivergenceCheck::Status;
  switch (check.status) {
    case S::NotEvaluated:
      return "not_evaluated";
    case S::Evidence:
      return Json{{"evidence", {{"n_hit", check.n_hit}, {"threshold", check.threshold}}}};
    case S::Insufficient:
      return Json{{"insufficient",
                   {{"max_value_reached", check.max_value_reached},
                    {"threshold", check.threshold}}}};
  }
  return nullptr;
}

inline Json to_json(const RatioLimitCheck& check) {
  using S = RatioLimitCheck::Status;
  if (check.status == S::NotEvaluated) return "not_evaluated";
  Json out;
  out["status"] = check.status == S::Estimated ? "estimated" : "no_limit_detected";
  out["estimate"] = check.estimate;
  out["oscillation"] = check.oscillation;
  out["window_start"] = check.window_start;
  return out;
}

inline Json to_json(const HypothesisReport& report) {
  return Json{{"n_max", report.n_max},
              {"positivity_f", to_json(report.positivity_f)},
              {"positivity_g", to_json(report.positivity_g)},
              {"divergence_f", to_json(report.divergence_f)},
              {"divergence_g", to_json(report.divergence_g)},
              {"ratio_limit", to_json(report.ratio_limit)},
              {"passed", report.passed()}};
}

inline Json to_json(const RatioLimitCertificate& cert) {
  return Json{{"epsilon", cert.epsilon},
              {"L_hat", cert.l_hat},
              {"M", detail::optional_json(cert.m)},
              {"N", detail::optional_json(cert.n)},
              {"bracket", Json::array({cert.bracket.lo, cert.bracket.hi})},
              {"n_max", cert.n_max},
              {"status", status_string(cert)}};
}

inline Json to_json(const ScheduleHypothesisReport& report) {
  Json out;
  out["n_max"] = report.n_max;
  out["a_range"] = report.a_range_violation
                       ? Json{{"first_violation_index", *report.a_range_violation}}
                       : Json("pass");
  out["b_sign"] = report.b_sign_violation
                      ? Json{{"first_violation_index", *report.b_sign_violation}}
                      : Json("pass");
  if (report.evaluated) {
    out["ratio_to_zero"] = report.ratio_to_zero;
    out["b_to_zero"] = report.b_to_zero;
    out["window_start"] = report.window_start;
  } else {
    out["ratio_to_zero"] = "not_evaluated";
    out["b_to_zero"] = "not_evaluated";
    out["window_start"] = nullptr;
  }
  out["a_sum_divergence"] = to_json(report.a_sum_divergence);
  out["passed"] = report.passed();
  return out;
}

inline Json to_json(const EnvelopeTrace& row) {
  return Json{{"n", row.n},
              {"h", row.h},
              {"h_next", row.h_next},
              {"J", row.j_term},
              {"tail_term", row.tail_term},
              {"log_prod", row.log_prod},
              {"r", detail::optional_json(row.r)}};
}

}  // namespace stolz
