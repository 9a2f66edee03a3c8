#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace sqlab {

inline constexpr int kSchemaVersion = 1;

using ReportValue = std::variant<double, std::int64_t, bool, std::string, std::vector<double>>;

/// Ordered list of named values; order is preserved on output.
class Fields {
public:
    Fields& set(std::string key, ReportValue v);
    const ReportValue* find(const std::string& key) const;
    double number(const std::string& key) const;
    const std::vector<std::pair<std::string, ReportValue>>& items() const { return items_; }
    bool empty() const { return items_.empty(); }

private:
    std::vector<std::pair<std::string, ReportValue>> items_;
};

/// Self-describing result of one experiment run.
struct ExperimentReport {
    std::string experiment;
    /// Resolved run configuration as a JSON object text; "{}" when absent.
    std::string config_json = "{}";
    Fields inputs;
    Fields tolerances;
    std::vector<Fields> records;
    Fields summary;
    std::vector<std::pair<std::string, bool>> verdicts;

    /// Pretty-printed JSON, keys in insertion order, doubles round-trip.
    std::string to_json() const;
    /// The records as a CSV table (union of record keys, first-seen order).
    void write_csv(std::ostream& out) const;
};

}  // namespace sqlab
