#include "coda/record.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "coda/error.hpp"

namespace coda {

std::string to_string(ChannelKind k) {
    switch (k) {
        case ChannelKind::lab: return "lab";
        case ChannelKind::medication: return "medication";
        case ChannelKind::procedure: return "procedure";
        case ChannelKind::device: return "device";
    }
    return "?";
}

std::string to_string(OrderStatus s) {
    return s == OrderStatus::resulted ? "resulted" : "pending";
}

ChannelKind channel_kind_from_string(const std::string& s) {
    if (s == "lab") return ChannelKind::lab;
    if (s == "medication") return ChannelKind::medication;
    if (s == "procedure") return ChannelKind::procedure;
    if (s == "device") return ChannelKind::device;
    throw ParseError("unknown channel kind '" + s + "'");
}

OrderStatus order_status_from_string(const std::string& s) {
    if (s == "resulted") return OrderStatus::resulted;
    if (s == "pending") return OrderStatus::pending;
    throw ParseError("unknown order status '" + s + "'");
}

std::vector<ChannelStat> build_channel_catalog(const std::vector<PatientRecord>& records) {
    std::map<std::pair<int, std::string>, std::set<const PatientRecord*>> users;
    for (const auto& rec : records)
        for (const auto& ev : rec.events)
            users[{static_cast<int>(ev.kind), ev.code}].insert(&rec);
    std::vector<ChannelStat> catalog;
    catalog.reserve(users.size());
    for (const auto& [key, patients] : users)
        catalog.push_back({static_cast<ChannelKind>(key.first), key.second,
                           static_cast<int>(patients.size())});
    return catalog;
}

void validate_record(const PatientRecord& rec) {
    if (rec.discharge < rec.admission)
        throw ValidationError("patient " + rec.patient_id + ": discharge before admission");
    if (rec.demographics.age < 0 || rec.demographics.age >= 150)
        throw ValidationError("patient " + rec.patient_id + ": age out of range");
    TimePoint prev = rec.admission;
    for (const auto& ev : rec.events) {
        if (ev.ts < prev)
            throw ValidationError("patient " + rec.patient_id + ": events not sorted");
        prev = ev.ts;
        if (ev.ts < rec.admission || rec.discharge < ev.ts)
            throw ValidationError("patient " + rec.patient_id + ": event outside stay window");
        if (ev.kind == ChannelKind::lab) {
            if (!ev.value && !ev.token && !ev.status)
                throw ValidationError("patient " + rec.patient_id +
                                      ": lab event without value or order status");
        } else if (ev.value || ev.token) {
            throw ValidationError("patient " + rec.patient_id + ": non-lab event carries a value");
        }
    }
}

CohortDataset filter_rare_channels(const CohortDataset& ds, int min_patients) {
    if (min_patients < 1) throw ValidationError("min_patients must be >= 1");
    std::set<std::pair<int, std::string>> keep;
    for (const auto& stat : ds.channel_catalog)
        if (stat.patient_count >= min_patients)
            keep.insert({static_cast<int>(stat.kind), stat.code});

    CohortDataset out;
    out.records.reserve(ds.records.size());
    for (const auto& rec : ds.records) {
        PatientRecord copy = rec;
        std::erase_if(copy.events, [&](const RawEvent& ev) {
            return !keep.count({static_cast<int>(ev.kind), ev.code});
        });
        out.records.push_back(std::move(copy));
    }
    out.channel_catalog = build_channel_catalog(out.records);
    return out;
}

CohortDataset restrict_to_channels(const CohortDataset& ds, const std::vector<ChannelStat>& keep) {
    std::set<std::pair<int, std::string>> allowed;
    for (const auto& stat : keep) allowed.insert({static_cast<int>(stat.kind), stat.code});
    CohortDataset out;
    out.records.reserve(ds.records.size());
    for (const auto& rec : ds.records) {
        PatientRecord copy = rec;
        std::erase_if(copy.events, [&](const RawEvent& ev) {
            return !allowed.count({static_cast<int>(ev.kind), ev.code});
        });
        out.records.push_back(std::move(copy));
    }
    out.channel_catalog = build_channel_catalog(out.records);
    return out;
}

std::pair<CohortDataset, CohortDataset> split_by_date(const CohortDataset& ds, TimePoint cutoff) {
    CohortDataset train, test;
    for (const auto& rec : ds.records) {
        if (rec.admission < cutoff) train.records.push_back(rec);
        else test.records.push_back(rec);
    }
    train.channel_catalog = build_channel_catalog(train.records);
    test.channel_catalog = build_channel_catalog(test.records);
    return {std::move(train), std::move(test)};
}

}  // namespace coda
