#include "sqlab/report.hpp"

#include <algorithm>
#include <ostream>

#include "json.hpp"
#include "sqlab/errors.hpp"
#include "sqlab/format.hpp"

namespace sqlab {

namespace {

using ojson = nlohmann::ordered_json;

ojson to_json_value(const ReportValue& v) {
    return std::visit([](const auto& x) { return ojson(x); }, v);
}

ojson to_json_object(const Fields& f) {
    ojson j = ojson::object();
    for (const auto& [k, v] : f.items()) j[k] = to_json_value(v);
    return j;
}

std::string csv_cell(const ReportValue& v) {
    struct Visitor {
        std::string operator()(double x) const { return fmt_num(x); }
        std::string operator()(std::int64_t x) const { return std::to_string(x); }
        std::string operator()(bool x) const { return x ? "true" : "false"; }
        std::string operator()(const std::string& s) const {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string out = "\"";
            for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
            return out + "\"";
        }
        std::string operator()(const std::vector<double>& xs) const {
            std::string out;
            for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ";" : "") + fmt_num(xs[i]);
            return out;
        }
    };
    return std::visit(Visitor{}, v);
}

}  // namespace

Fields& Fields::set(std::string key, ReportValue v) {
    for (auto& [k, old] : items_) {
        if (k == key) {
            old = std::move(v);
            return *this;
        }
    }
    items_.emplace_back(std::move(key), std::move(v));
    return *this;
}

const ReportValue* Fields::find(const std::string& key) const {
    for (const auto& [k, v] : items_)
        if (k == key) return &v;
    return nullptr;
}

double Fields::number(const std::string& key) const {
    const ReportValue* v = find(key);
    if (!v) throw BadParameter("no field '" + key + "'");
    if (const auto* d = std::get_if<double>(v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
    throw BadParameter("field '" + key + "' is not numeric");
}

std::string ExperimentReport::to_json() const {
    ojson j;
    j["schema_version"] = kSchemaVersion;
    j["experiment"] = experiment;
    j["config"] = ojson::parse(config_json.empty() ? "{}" : config_json);
    j["inputs"] = to_json_object(inputs);
    j["tolerances"] = to_json_object(tolerances);
    j["records"] = ojson::array();
    for (const auto& r : records) j["records"].push_back(to_json_object(r));
    j["summary"] = to_json_object(summary);
    ojson v = ojson::object();
    for (const auto& [k, ok] : verdicts) v[k] = ok ? "pass" : "fail";
    j["verdicts"] = v;
    return j.dump(2) + "\n";
}

void ExperimentReport::write_csv(std::ostream& out) const {
    std::vector<std::string> keys;
    for (const auto& r : records)
        for (const auto& [k, _] : r.items())
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    out << "# schema_version: " << kSchemaVersion << "\n";
    for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << keys[i];
    out << "\n";
    for (const auto& r : records) {
        for (std::size_t i = 0; i < keys.size(); ++i) {
            if (i) out << ',';
            if (const ReportValue* v = r.find(keys[i])) out << csv_cell(*v);
        }
        out << "\n";
    }
}

}  // namespace sqlab
