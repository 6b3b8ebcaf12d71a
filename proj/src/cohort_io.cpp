#include "coda/cohort_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "coda/csv.hpp"
#include "coda/error.hpp"

namespace coda {

namespace {

using nlohmann::json;

constexpr const char* kCsvHeader =
    "record_type,patient_id,ts,kind,code,value,status,admission,discharge,sex,age,race,"
    "dev0,dev1,dev2,dev3";

struct PendingEvent {
    std::string patient_id;
    RawEvent event;
    long line;
};

struct Builder {
    std::map<std::string, PatientRecord> headers;  // keyed by patient_id
    std::vector<std::string> header_order;
    std::vector<PendingEvent> events;
    std::vector<std::string>* warnings;

    void warn(const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    }

    void add_header(PatientRecord rec, long line) {
        if (headers.count(rec.patient_id))
            throw ParseError("duplicate patient header '" + rec.patient_id + "'", line);
        header_order.push_back(rec.patient_id);
        headers.emplace(rec.patient_id, std::move(rec));
    }

    CohortDataset finish() {
        for (const auto& ev : events) {
            auto it = headers.find(ev.patient_id);
            if (it == headers.end()) {
                warn("line " + std::to_string(ev.line) + ": event for unknown patient '" +
                     ev.patient_id + "' dropped");
                continue;
            }
            auto& rec = it->second;
            if (ev.event.ts < rec.admission || rec.discharge < ev.event.ts) {
                warn("line " + std::to_string(ev.line) + ": event outside stay window for '" +
                     ev.patient_id + "' dropped");
                continue;
            }
            rec.events.push_back(ev.event);
        }
        CohortDataset ds;
        ds.records.reserve(header_order.size());
        for (const auto& id : header_order) {
            auto& rec = headers.at(id);
            std::stable_sort(rec.events.begin(), rec.events.end(),
                             [](const RawEvent& a, const RawEvent& b) { return a.ts < b.ts; });
            ds.records.push_back(std::move(rec));
        }
        ds.channel_catalog = build_channel_catalog(ds.records);
        return ds;
    }
};

std::array<bool, 4> devices_from_json(const json& j, long line) {
    if (!j.is_array() || j.size() != 4)
        throw ParseError("'devices' must be an array of 4 booleans", line);
    std::array<bool, 4> flags{};
    for (size_t i = 0; i < 4; ++i) {
        if (!j[i].is_boolean()) throw ParseError("'devices' must be booleans", line);
        flags[i] = j[i].get<bool>();
    }
    return flags;
}

void parse_jsonl(std::istream& in, Builder& b) {
    std::string line;
    long line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(std::string("bad JSON: ") + e.what(), line_number);
        }
        if (!j.is_object()) throw ParseError("expected a JSON object", line_number);
        if (!j.contains("patient_id") || !j["patient_id"].is_string())
            throw ParseError("missing 'patient_id'", line_number);

        if (j.contains("admission")) {
            PatientRecord rec;
            rec.patient_id = j["patient_id"].get<std::string>();
            try {
                rec.admission = parse_iso_time(j.at("admission").get<std::string>());
                rec.discharge = parse_iso_time(j.at("discharge").get<std::string>());
                rec.demographics.sex = j.at("sex").get<std::string>();
                rec.demographics.age = j.at("age").get<double>();
                rec.demographics.race = j.at("race").get<std::string>();
            } catch (const ParseError&) {
                throw;
            } catch (const std::exception& e) {
                throw ParseError(std::string("bad patient header: ") + e.what(), line_number);
            }
            rec.device_flags = devices_from_json(j.at("devices"), line_number);
            b.add_header(std::move(rec), line_number);
            continue;
        }

        PendingEvent pe;
        pe.patient_id = j["patient_id"].get<std::string>();
        pe.line = line_number;
        if (!j.contains("ts") || !j["ts"].is_string())
            throw ParseError("missing 'ts'", line_number);
        pe.event.ts = parse_iso_time(j["ts"].get<std::string>());
        if (!j.contains("kind") || !j["kind"].is_string())
            throw ParseError("missing 'kind'", line_number);
        const std::string kind = j["kind"].get<std::string>();
        try {
            pe.event.kind = channel_kind_from_string(kind);
        } catch (const ParseError&) {
            b.warn("line " + std::to_string(line_number) + ": unknown channel kind '" + kind +
                   "', event dropped");
            continue;
        }
        if (!j.contains("code") || !j["code"].is_string())
            throw ParseError("missing 'code'", line_number);
        pe.event.code = j["code"].get<std::string>();
        if (j.contains("value")) {
            if (j["value"].is_number()) pe.event.value = j["value"].get<double>();
            else if (j["value"].is_string()) pe.event.token = j["value"].get<std::string>();
            else throw ParseError("'value' must be a number or string", line_number);
        }
        if (j.contains("status"))
            pe.event.status = order_status_from_string(j["status"].get<std::string>());
        if (pe.event.kind != ChannelKind::lab && (pe.event.value || pe.event.token)) {
            b.warn("line " + std::to_string(line_number) + ": value on non-lab event dropped");
            pe.event.value.reset();
            pe.event.token.reset();
        }
        b.events.push_back(std::move(pe));
    }
}

void parse_csv_stream(std::istream& in, Builder& b) {
    std::string line;
    long line_number = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = csv_split(line, line_number);
        if (header.empty()) {
            header = fields;
            if (csv_join(header) != kCsvHeader)
                throw ParseError("unexpected CSV header (see README for the column order)",
                                 line_number);
            continue;
        }
        if (fields.size() != 16)
            throw ParseError("expected 16 CSV fields, got " + std::to_string(fields.size()),
                             line_number);
        const std::string& type = fields[0];
        if (type == "patient") {
            PatientRecord rec;
            rec.patient_id = fields[1];
            rec.admission = parse_iso_time(fields[7]);
            rec.discharge = parse_iso_time(fields[8]);
            rec.demographics.sex = fields[9];
            try {
                rec.demographics.age = std::stod(fields[10]);
            } catch (const std::exception&) {
                throw ParseError("bad age '" + fields[10] + "'", line_number);
            }
            rec.demographics.race = fields[11];
            for (int i = 0; i < 4; ++i) {
                const std::string& f = fields[12 + i];
                if (f != "0" && f != "1") throw ParseError("device flags must be 0/1", line_number);
                rec.device_flags[i] = f == "1";
            }
            b.add_header(std::move(rec), line_number);
        } else if (type == "event") {
            PendingEvent pe;
            pe.patient_id = fields[1];
            pe.line = line_number;
            pe.event.ts = parse_iso_time(fields[2]);
            try {
                pe.event.kind = channel_kind_from_string(fields[3]);
            } catch (const ParseError&) {
                b.warn("line " + std::to_string(line_number) + ": unknown channel kind '" +
                       fields[3] + "', event dropped");
                continue;
            }
            pe.event.code = fields[4];
            if (!fields[5].empty()) {
                try {
                    size_t used = 0;
                    double v = std::stod(fields[5], &used);
                    if (used == fields[5].size()) pe.event.value = v;
                    else pe.event.token = fields[5];
                } catch (const std::exception&) {
                    pe.event.token = fields[5];
                }
            }
            if (!fields[6].empty()) pe.event.status = order_status_from_string(fields[6]);
            if (pe.event.kind != ChannelKind::lab && (pe.event.value || pe.event.token)) {
                b.warn("line " + std::to_string(line_number) + ": value on non-lab event dropped");
                pe.event.value.reset();
                pe.event.token.reset();
            }
            b.events.push_back(std::move(pe));
        } else {
            throw ParseError("unknown record_type '" + type + "'", line_number);
        }
    }
}

}  // namespace

CohortFormat cohort_format_from_string(const std::string& s) {
    if (s == "jsonl") return CohortFormat::jsonl;
    if (s == "csv") return CohortFormat::csv;
    throw ValidationError("unknown cohort format '" + s + "' (expected jsonl or csv)");
}

CohortDataset parse_events(std::istream& in, CohortFormat format,
                           std::vector<std::string>* warnings) {
    Builder b;
    b.warnings = warnings;
    if (format == CohortFormat::jsonl) parse_jsonl(in, b);
    else parse_csv_stream(in, b);
    return b.finish();
}

CohortDataset parse_events_file(const std::string& path, CohortFormat format,
                                std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read file: " + path);
    return parse_events(in, format, warnings);
}

void serialize_cohort(const CohortDataset& ds, std::ostream& out, CohortFormat format) {
    if (format == CohortFormat::jsonl) {
        for (const auto& rec : ds.records) {
            json h;
            h["patient_id"] = rec.patient_id;
            h["admission"] = format_iso_time(rec.admission);
            h["discharge"] = format_iso_time(rec.discharge);
            h["sex"] = rec.demographics.sex;
            h["age"] = rec.demographics.age;
            h["race"] = rec.demographics.race;
            h["devices"] = rec.device_flags;
            out << h.dump() << '\n';
            for (const auto& ev : rec.events) {
                json e;
                e["patient_id"] = rec.patient_id;
                e["ts"] = format_iso_time(ev.ts);
                e["kind"] = to_string(ev.kind);
                e["code"] = ev.code;
                if (ev.value) e["value"] = *ev.value;
                else if (ev.token) e["value"] = *ev.token;
                if (ev.status) e["status"] = to_string(*ev.status);
                out << e.dump() << '\n';
            }
        }
        return;
    }
    out << kCsvHeader << '\n';
    for (const auto& rec : ds.records) {
        std::vector<std::string> row(16);
        row[0] = "patient";
        row[1] = rec.patient_id;
        row[7] = format_iso_time(rec.admission);
        row[8] = format_iso_time(rec.discharge);
        row[9] = rec.demographics.sex;
        row[10] = format_double(rec.demographics.age);
        row[11] = rec.demographics.race;
        for (int i = 0; i < 4; ++i) row[12 + i] = rec.device_flags[i] ? "1" : "0";
        out << csv_join(row) << '\n';
        for (const auto& ev : rec.events) {
            std::vector<std::string> er(16);
            er[0] = "event";
            er[1] = rec.patient_id;
            er[2] = format_iso_time(ev.ts);
            er[3] = to_string(ev.kind);
            er[4] = ev.code;
            if (ev.value) er[5] = format_double(*ev.value);
            else if (ev.token) er[5] = *ev.token;
            if (ev.status) er[6] = to_string(*ev.status);
            out << csv_join(er) << '\n';
        }
    }
}

void serialize_cohort_file(const CohortDataset& ds, const std::string& path, CohortFormat format) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    serialize_cohort(ds, out, format);
}

}  // namespace coda
