#pragma once

// Structured analysis report with lossless JSON round-tripping, plus the
// version/config-hash provenance block.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "limitlyap/system.hpp"

namespace limitlyap {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the canonical config string, printed as 16 hex digits.
inline std::string config_hash(const std::string& canonical) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct AnalysisReport {
    // provenance
    std::string version = kToolVersion;
    std::string config = "";
    std::string hash = "";

    // system echo
    std::string fx, fy;
    std::string transform_u, transform_v; // empty when no transform was used
    std::array<double, 4> window{-2.0, 2.0, -2.0, 2.0};
    int grid_n = 101;
    double r_max = 10.0;
    int cycle_samples = 360;

    // polar form
    std::string rdot, thetadot;
    std::string radial_kind;
    std::string upsilon0, upsilon1, upsilon2, psi;

    struct CycleInfo {
        double radius = 0.0;
        std::string stability;
        double residual = 0.0;
        double derivative = 0.0;
        bool tangential = false;
    };
    std::vector<CycleInfo> cycles;

    // potential
    std::string construction; // "symbolic" | "numeric"
    std::string phi_r;
    std::string phi_working; // Cartesian potential in the working coordinates
    std::string phi;         // final potential in the original coordinates
    double quad_error_bound = 0.0;
    bool infimum_certificate = false;

    // verification
    bool verified = false;
    bool lyapunov_pass = false;
    double phi_min = 0.0;
    std::array<double, 2> phi_argmin{0.0, 0.0};
    double lie_max = 0.0;
    std::array<double, 2> lie_argmax{0.0, 0.0};
    long stationary_count = 0;
    double stationary_r_min = 0.0, stationary_r_max = 0.0;
    bool upsilon1_nonnegative = true;

    // dissipation criteria on the cycle
    bool has_criteria = false;
    double hp_max_abs = 0.0;
    double div_min = 0.0, div_max = 0.0;
    std::string criteria_verdict;

    std::string verdict; // "pass" | "fail"
    std::string diagnostic;
    int exit_code = 0;
};

inline void to_json(nlohmann::json& j, const AnalysisReport::CycleInfo& c) {
    j = nlohmann::json{{"radius", c.radius},
                       {"stability", c.stability},
                       {"residual", c.residual},
                       {"derivative", c.derivative},
                       {"tangential", c.tangential}};
}

inline void from_json(const nlohmann::json& j, AnalysisReport::CycleInfo& c) {
    j.at("radius").get_to(c.radius);
    j.at("stability").get_to(c.stability);
    j.at("residual").get_to(c.residual);
    j.at("derivative").get_to(c.derivative);
    j.at("tangential").get_to(c.tangential);
}

inline void to_json(nlohmann::json& j, const AnalysisReport& r) {
    j = nlohmann::json{
        {"provenance", {{"version", r.version}, {"config", r.config}, {"hash", r.hash}}},
        {"system",
         {{"fx", r.fx},
          {"fy", r.fy},
          {"transform_u", r.transform_u},
          {"transform_v", r.transform_v},
          {"window", r.window},
          {"grid_n", r.grid_n},
          {"r_max", r.r_max},
          {"cycle_samples", r.cycle_samples}}},
        {"polar",
         {{"rdot", r.rdot},
          {"thetadot", r.thetadot},
          {"kind", r.radial_kind},
          {"upsilon0", r.upsilon0},
          {"upsilon1", r.upsilon1},
          {"upsilon2", r.upsilon2},
          {"psi", r.psi}}},
        {"cycles", r.cycles},
        {"potential",
         {{"construction", r.construction},
          {"phi_r", r.phi_r},
          {"phi_working", r.phi_working},
          {"phi", r.phi},
          {"quad_error_bound", r.quad_error_bound},
          {"infimum_certificate", r.infimum_certificate}}},
        {"lyapunov",
         {{"verified", r.verified},
          {"pass", r.lyapunov_pass},
          {"phi_min", r.phi_min},
          {"phi_argmin", r.phi_argmin},
          {"lie_max", r.lie_max},
          {"lie_argmax", r.lie_argmax},
          {"stationary_count", r.stationary_count},
          {"stationary_r_min", r.stationary_r_min},
          {"stationary_r_max", r.stationary_r_max},
          {"upsilon1_nonnegative", r.upsilon1_nonnegative}}},
        {"criteria",
         {{"present", r.has_criteria},
          {"hp_max_abs", r.hp_max_abs},
          {"div_min", r.div_min},
          {"div_max", r.div_max},
          {"verdict", r.criteria_verdict}}},
        {"verdict", r.verdict},
        {"diagnostic", r.diagnostic},
        {"exit_code", r.exit_code}};
}

inline void from_json(const nlohmann::json& j, AnalysisReport& r) {
    const auto& prov = j.at("provenance");
    prov.at("version").get_to(r.version);
    prov.at("config").get_to(r.config);
    prov.at("hash").get_to(r.hash);
    const auto& sys = j.at("system");
    sys.at("fx").get_to(r.fx);
    sys.at("fy").get_to(r.fy);
    sys.at("transform_u").get_to(r.transform_u);
    sys.at("transform_v").get_to(r.transform_v);
    sys.at("window").get_to(r.window);
    sys.at("grid_n").get_to(r.grid_n);
    sys.at("r_max").get_to(r.r_max);
    sys.at("cycle_samples").get_to(r.cycle_samples);
    const auto& polar = j.at("polar");
    polar.at("rdot").get_to(r.rdot);
    polar.at("thetadot").get_to(r.thetadot);
    polar.at("kind").get_to(r.radial_kind);
    polar.at("upsilon0").get_to(r.upsilon0);
    polar.at("upsilon1").get_to(r.upsilon1);
    polar.at("upsilon2").get_to(r.upsilon2);
    polar.at("psi").get_to(r.psi);
    j.at("cycles").get_to(r.cycles);
    const auto& pot = j.at("potential");
    pot.at("construction").get_to(r.construction);
    pot.at("phi_r").get_to(r.phi_r);
    pot.at("phi_working").get_to(r.phi_working);
    pot.at("phi").get_to(r.phi);
    pot.at("quad_error_bound").get_to(r.quad_error_bound);
    pot.at("infimum_certificate").get_to(r.infimum_certificate);
    const auto& lyap = j.at("lyapunov");
    lyap.at("verified").get_to(r.verified);
    lyap.at("pass").get_to(r.lyapunov_pass);
    lyap.at("phi_min").get_to(r.phi_min);
    lyap.at("phi_argmin").get_to(r.phi_argmin);
    lyap.at("lie_max").get_to(r.lie_max);
    lyap.at("lie_argmax").get_to(r.lie_argmax);
    lyap.at("stationary_count").get_to(r.stationary_count);
    lyap.at("stationary_r_min").get_to(r.stationary_r_min);
    lyap.at("stationary_r_max").get_to(r.stationary_r_max);
    lyap.at("upsilon1_nonnegative").get_to(r.upsilon1_nonnegative);
    const auto& crit = j.at("criteria");
    crit.at("present").get_to(r.has_criteria);
    crit.at("hp_max_abs").get_to(r.hp_max_abs);
    crit.at("div_min").get_to(r.div_min);
    crit.at("div_max").get_to(r.div_max);
    crit.at("verdict").get_to(r.criteria_verdict);
    j.at("verdict").get_to(r.verdict);
    j.at("diagnostic").get_to(r.diagnostic);
    j.at("exit_code").get_to(r.exit_code);
}

} // namespace limitlyap
