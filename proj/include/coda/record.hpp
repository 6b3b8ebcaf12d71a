#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "coda/time.hpp"

namespace coda {

enum class ChannelKind { lab, medication, procedure, device };

enum class OrderStatus { resulted, pending };

std::string to_string(ChannelKind k);
std::string to_string(OrderStatus s);
ChannelKind channel_kind_from_string(const std::string& s);
OrderStatus order_status_from_string(const std::string& s);

// One timestamped observation. Labs carry either a numeric value or a
// categorical token (or a pending order status); medication, procedure and
// device events carry no value.
struct RawEvent {
    TimePoint ts;
    ChannelKind kind = ChannelKind::lab;
    std::string code;
    std::optional<double> value;
    std::optional<std::string> token;
    std::optional<OrderStatus> status;

    bool operator==(const RawEvent&) const = default;
};

struct Demographics {
    std::string sex;
    double age = 0.0;
    std::string race;

    bool operator==(const Demographics&) const = default;
};

struct PatientRecord {
    std::string patient_id;
    TimePoint admission;
    TimePoint discharge;
    Demographics demographics;
    std::array<bool, 4> device_flags{};
    std::vector<RawEvent> events;  // sorted nondecreasing by ts

    bool operator==(const PatientRecord&) const = default;
};

// Per-(kind, code) usage statistics across a cohort.
struct ChannelStat {
    ChannelKind kind;
    std::string code;
    int patient_count = 0;

    bool operator==(const ChannelStat&) const = default;
};

struct CohortDataset {
    std::vector<PatientRecord> records;
    std::vector<ChannelStat> channel_catalog;  // sorted by (kind, code)

    bool operator==(const CohortDataset&) const = default;
};

// Recomputes the channel catalog from the records (distinct-patient counts).
std::vector<ChannelStat> build_channel_catalog(const std::vector<PatientRecord>& records);

// Validates record invariants; throws ValidationError naming the patient.
void validate_record(const PatientRecord& rec);

// Drops every channel used by fewer than min_patients distinct patients,
// removing its events from all records. Idempotent at a fixed threshold.
CohortDataset filter_rare_channels(const CohortDataset& ds, int min_patients);

// Restricts the dataset to the given (kind, code) channels; used to apply a
// train-side filter to a test split.
CohortDataset restrict_to_channels(const CohortDataset& ds, const std::vector<ChannelStat>& keep);

// Partitions by admission time: train gets admissions strictly before cutoff.
std::pair<CohortDataset, CohortDataset> split_by_date(const CohortDataset& ds, TimePoint cutoff);

}  // namespace coda
