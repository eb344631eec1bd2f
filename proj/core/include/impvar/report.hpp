#pragma once

#include <string>
#include <vector>

namespace impvar {

/// One sampled inequality or identity check.
///
/// `worst_margin` is (rhs - lhs) / max(|lhs|, |rhs|) at the worst sample,
/// so it is negative exactly when the check failed there.
struct AuditEntry {
    std::string id;
    std::string description;
    bool pass = true;
    bool mandatory = true;
    bool indicative = false;  // sampled trend, not a proof
    bool marginal = false;    // worst relative margin below 1e-12
    double worst_margin = 0.0;
    double witness_t = 0.0;
    double witness_u = 0.0;
    std::size_t samples = 0;
    std::string note;
};

struct AuditReport {
    std::vector<AuditEntry> entries;

    bool overall() const;
    const AuditEntry* find(const std::string& id) const;
    std::vector<std::string> failed_ids() const;
    std::string to_text() const;
    std::string to_json() const;
};

/// Accumulates the worst margin of a family of sampled checks.
class MarginTracker {
public:
    explicit MarginTracker(std::string id, std::string description = {});

    /// lhs <= rhs (strict = false) or lhs < rhs (strict = true), zero tolerance.
    void le(double lhs, double rhs, double t, double u, bool strict = false);
    /// |a - b| <= tol * scale.
    void near(double a, double b, double tol, double scale, double t, double u);
    void fail_at(double t, double u, const std::string& why);

    AuditEntry finish(bool mandatory = true, bool indicative = false) const;

private:
    void record(bool ok, double margin, double t, double u);
    AuditEntry e_;
    bool first_ = true;
    bool inequality_ = false;
    double tightest_ = 1.0;  // smallest margin over samples with a nonzero scale
};

}  // namespace impvar
