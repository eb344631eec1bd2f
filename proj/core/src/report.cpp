#include "impvar/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace impvar {

bool AuditReport::overall() const {
    return std::all_of(entries.begin(), entries.end(),
                       [](const AuditEntry& e) { return e.pass || !e.mandatory; });
}

const AuditEntry* AuditReport::find(const std::string& id) const {
    for (const auto& e : entries)
        if (e.id == id) return &e;
    return nullptr;
}

std::vector<std::string> AuditReport::failed_ids() const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (!e.pass) out.push_back(e.id);
    return out;
}

std::string AuditReport::to_text() const {
    std::ostringstream os;
    os << std::left << std::setw(10) << "id" << std::setw(6) << "pass" << std::setw(16) << "worst margin"
       << std::setw(26) << "witness (t, u)" << "note\n";
    for (const auto& e : entries) {
        std::ostringstream w;
        w << std::setprecision(4) << "(" << e.witness_t << ", " << e.witness_u << ")";
        std::string note = e.note;
        if (e.indicative) note = "[indicative] " + note;
        if (e.marginal) note = "[numerically marginal] " + note;
        os << std::setw(10) << e.id << std::setw(6) << (e.pass ? "yes" : "NO") << std::setw(16)
           << std::setprecision(6) << e.worst_margin << std::setw(26) << w.str() << note << "\n";
    }
    os << "overall: " << (overall() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

std::string AuditReport::to_json() const {
    nlohmann::ordered_json j;
    j["format_version"] = 1;
    j["overall"] = overall();
    auto& arr = j["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
        arr.push_back({{"id", e.id},
                       {"description", e.description},
                       {"pass", e.pass},
                       {"mandatory", e.mandatory},
                       {"indicative", e.indicative},
                       {"numerically_marginal", e.marginal},
                       {"worst_margin", e.worst_margin},
                       {"witness", {{"t", e.witness_t}, {"u", e.witness_u}}},
                       {"samples", e.samples},
                       {"note", e.note}});
    }
    return j.dump(2);
}

MarginTracker::MarginTracker(std::string id, std::string description) {
    e_.id = std::move(id);
    e_.description = std::move(description);
}

void MarginTracker::record(bool ok, double margin, double t, double u) {
    ++e_.samples;
    if (!ok && e_.pass) {
        e_.pass = false;
        e_.worst_margin = margin;
        e_.witness_t = t;
        e_.witness_u = u;
        first_ = false;
        return;
    }
    if (!ok || e_.pass) {
        if (first_ || margin < e_.worst_margin) {
            e_.worst_margin = margin;
            e_.witness_t = t;
            e_.witness_u = u;
            first_ = false;
        }
    }
}

void MarginTracker::le(double lhs, double rhs, double t, double u, bool strict) {
    inequality_ = true;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    const double diff = rhs - lhs;
    const double margin = scale > 0 ? diff / scale : 0.0;
    const bool ok = std::isfinite(lhs) && std::isfinite(rhs) && (strict ? diff > 0 : diff >= 0);
    if (scale > 0 && std::isfinite(margin)) tightest_ = std::min(tightest_, margin);
    record(ok, std::isfinite(margin) ? margin : -1.0, t, u);
}

void MarginTracker::near(double a, double b, double tol, double scale, double t, double u) {
    const double dev = std::abs(a - b);
    const double allowed = tol * scale;
    const double margin = scale > 0 ? (allowed - dev) / scale : (dev == 0 ? 0.0 : -1.0);
    record(std::isfinite(dev) && dev <= allowed, margin, t, u);
}

void MarginTracker::fail_at(double t, double u, const std::string& why) {
    record(false, -1.0, t, u);
    if (e_.note.empty()) e_.note = why;
}

AuditEntry MarginTracker::finish(bool mandatory, bool indicative) const {
    AuditEntry out = e_;
    out.mandatory = mandatory;
    out.indicative = indicative;
    out.marginal = inequality_ && out.pass && tightest_ < 1e-12;
    return out;
}

}  // namespace impvar
