#pragma once

#include <string>

#include <json.hpp>

#include "qlil/classfn.hpp"
#include "qlil/mle.hpp"
#include "qlil/montecarlo.hpp"
#include "qlil/qsim.hpp"

namespace qlil {

using Json = nlohmann::json;

/// Shortest decimal text that round-trips to the same double; "inf", "-inf"
/// and "nan" for non-finite values.
std::string format_double(double x);

// Window records carry exactly the ObservationWindow fields plus the two
// counts. Reading validates the record and throws PreconditionError on any
// mismatch.
Json window_to_json(const ObservationWindow& w);
ObservationWindow window_from_json(const Json& j);

Json mle_to_json(const MleResult& r);

Json report_to_json(const ClassificationReport& r);
Json report_to_json(const C2Report& r);
Json report_to_json(const NormalityReport& r);
Json report_to_json(const C1Report& r);
Json report_to_json(const CrossingReport& r);
Json report_to_json(const ConsistencyReport& r);

// CSV column headers are part of the file format; see docs/formats.md.
inline constexpr const char* kNormalityHeader =
    "T,used,excluded,ks_theta,ks_phi,mean_z_theta,mean_z_phi,eps_sqrt,envelope_1,envelope_5,"
    "envelope_25";
inline constexpr const char* kC1Header = "T,eps,eps_sqrt,mean_a,mean_d,freq_a,se_a,freq_d,se_d";
inline constexpr const char* kCrossingsHeader = "boundary,k,T,h,crossing_freq,tail_fraction";
inline constexpr const char* kConsistencyHeader = "T,mae_theta,mae_phi,ratio_theta,ratio_phi";
inline constexpr const char* kDiagnosticsHeader = "n,t_n,h,S_A,S_B,S_C,S_D";

std::string to_csv(const NormalityReport& r);
std::string to_csv(const C1Report& r);
std::string to_csv(const CrossingReport& r);
std::string to_csv(const ConsistencyReport& r);
std::string to_csv(const std::vector<SeriesRow>& rows);

}  // namespace qlil
