#include "lipfd/evalkit.hpp"

#include "lipfd/errors.hpp"

#include <fstream>
#include <sstream>

namespace lipfd::evalkit {

void write_records(const std::filesystem::path& path, const std::vector<Record>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write records: " + path.string());
    out << "kind\tseverity\tmetric\tvalue\n";
    out.precision(17);
    for (const auto& r : records) {
        out << r.kind << '\t' << r.severity << '\t' << r.metric << '\t' << r.value << '\n';
    }
}

std::vector<Record> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open records: " + path.string());
    std::vector<Record> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1 && line.rfind("kind\t", 0) == 0) continue;  // header
        std::stringstream ss(line);
        std::string kind, severity, metric, value;
        if (!std::getline(ss, kind, '\t') || !std::getline(ss, severity, '\t') ||
            !std::getline(ss, metric, '\t') || !std::getline(ss, value, '\t')) {
            throw ParseError("record line needs 4 tab-separated fields", lineno);
        }
        Record r;
        r.kind = kind;
        try {
            r.severity = std::stoi(severity);
            r.value = std::stod(value);
        } catch (const std::exception&) {
            throw ParseError("bad numeric field in record", lineno);
        }
        r.metric = metric;
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<Record> sweep_records(const SweepResult& sweep) {
    std::vector<Record> records;
    records.push_back(Record{"clean", 0, "auc", sweep.clean_auc});
    for (size_t ki = 0; ki < sweep.kinds.size(); ++ki) {
        for (size_t si = 0; si < sweep.severities.size(); ++si) {
            records.push_back(Record{perturb::kind_name(sweep.kinds[ki]), sweep.severities[si],
                                     "auc", sweep.auc[ki][si]});
        }
        records.push_back(Record{perturb::kind_name(sweep.kinds[ki]), 0, "mean_auc",
                                 sweep.mean_auc[ki]});
    }
    return records;
}

}  // namespace lipfd::evalkit
