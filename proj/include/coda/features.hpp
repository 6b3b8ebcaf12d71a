#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "coda/record.hpp"
#include "coda/time.hpp"

namespace coda {

// Missing feature values are NaN until standardize() imputes them.
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
bool is_missing(double v);

struct SegmentationConfig {
    int anchor_minute_of_day = 8 * 60;  // 08:00
    std::int64_t period_minutes = kMinutesPerDay;
};

// Anchor-aligned segmentation points strictly inside (admission, discharge).
std::vector<TimePoint> segment_times(TimePoint admission, TimePoint discharge,
                                     const SegmentationConfig& cfg);

// ---------------------------------------------------------------------------
// Per-channel extractors. All "time since" outputs are in hours, slopes are
// per hour. Inputs must be time-sorted with times <= t.

// Feature set for labs with continuous values. Field order matches the
// catalog column order.
struct ContinuousLabFeatures {
    double last = kMissing;                // 1
    double second_last = kMissing;         // 2
    double first = kMissing;               // 3
    double last_difference = kMissing;     // 4  last - second_last
    double last_pct_change = kMissing;     // 5  (last - second_last) / second_last
    double last_slope = kMissing;          // 6  per hour
    double nadir = kMissing;               // 7  running minimum
    double nadir_difference = kMissing;    // 8  last - nadir
    double nadir_pct_difference = kMissing;// 9  (last - nadir) / nadir
    double hours_since_nadir = kMissing;   // 10 (most recent attainment)
    double apex = kMissing;                // 11 running maximum
    double apex_difference = kMissing;     // 12 last - apex
    double apex_pct_difference = kMissing; // 13 (last - apex) / apex
    double hours_since_apex = kMissing;    // 14
    double baseline_difference = kMissing; // 15 last - first
    double baseline_pct_difference = kMissing;  // 16
    double overall_slope = kMissing;       // 17 (last - first) / elapsed hours
    double hours_since_last = kMissing;    // 18
    double hours_since_first = kMissing;   // 19
    double hours_between_last_two = kMissing;   // 20
    double count = 0;                      // 21
    double running_mean = kMissing;        // 22
    double running_std = kMissing;         // 23 sample std, needs >= 2 values
    double ever_measured = 0;              // 24
    double pending_order = 0;              // 25
    double measured_within_period = 0;     // 26

    std::vector<double> as_vector() const;
};

struct TimedValue {
    TimePoint ts;
    double value;
};

struct TimedToken {
    TimePoint ts;
    std::string token;
};

ContinuousLabFeatures extract_continuous_lab_features(const std::vector<TimedValue>& series,
                                                      bool pending, TimePoint t,
                                                      std::int64_t period_minutes);

// Feature set for labs with categorical results. Tokens are one-hot encoded
// against the training vocabulary during vectorization.
struct CategoricalLabFeatures {
    std::optional<std::string> last;
    std::optional<std::string> second_last;
    std::optional<std::string> first;
    double hours_since_last = kMissing;
    double performed = 0;
    double pending_order = 0;
    double hours_since_first = kMissing;
};

CategoricalLabFeatures extract_categorical_lab_features(const std::vector<TimedToken>& series,
                                                        bool pending, TimePoint t);

// currently_on is true iff an administration occurred within the trailing
// currently_on_window ending at t.
struct MedicationFeatures {
    double currently_on = 0;
    double hours_since_first_on = kMissing;
    double hours_since_last_on = kMissing;
    double hours_since_order_change = kMissing;
};

MedicationFeatures extract_medication_features(const std::vector<TimePoint>& admin_times,
                                               const std::vector<TimePoint>& order_changes,
                                               TimePoint t, std::int64_t currently_on_window);

// Order-change times derived from administration times: the on/off state
// transitions of the trailing-window "currently on" signal, up to `now`.
std::vector<TimePoint> derive_order_changes(const std::vector<TimePoint>& admin_times,
                                            std::int64_t window_minutes, TimePoint now);

struct ProcedureFeatures {
    double ever_performed = 0;
    double hours_since_first = kMissing;
    double hours_since_last = kMissing;
};

ProcedureFeatures extract_procedure_features(const std::vector<TimePoint>& proc_times, TimePoint t);

// ---------------------------------------------------------------------------
// Catalog: the fixed, ordered column layout shared by all instances.

enum class GroupKind { lab_continuous, lab_categorical, medication, procedure, demographics };

std::string to_string(GroupKind k);

struct FeatureGroup {
    int id = 0;
    GroupKind kind = GroupKind::demographics;
    std::string code;  // channel code; empty for the demographics group
    std::string label() const;
};

enum class FeatureValueType { continuous, binary };

struct FeatureDescriptor {
    int column = 0;
    int group_id = 0;
    std::string name;
    FeatureValueType value_type = FeatureValueType::continuous;
    std::string units;
};

enum class ActionKind { lab_order, medication_given };

std::string to_string(ActionKind k);
ActionKind action_kind_from_string(const std::string& s);

struct ActionDescriptor {
    ActionKind kind = ActionKind::lab_order;
    std::string code;

    auto operator<=>(const ActionDescriptor&) const = default;
    std::string label() const;
};

struct FeatureCatalog {
    SegmentationConfig segmentation;
    std::vector<FeatureGroup> groups;
    std::vector<FeatureDescriptor> features;  // ordered by column
    std::vector<ActionDescriptor> actions;
    // Training vocabularies for one-hot encodings; unseen values map to the
    // trailing "other" bucket.
    std::map<std::string, std::vector<std::string>> lab_token_vocab;
    std::vector<std::string> sex_vocab;
    std::vector<std::string> race_vocab;

    int n_columns() const { return static_cast<int>(features.size()); }
    int n_actions() const { return static_cast<int>(actions.size()); }
    std::vector<int> group_columns(int group_id) const;
    const FeatureGroup& group_by_id(int group_id) const;
};

// Builds the catalog from a training cohort. A lab code is treated as
// categorical iff any training event for it carries a token value. Groups are
// ordered labs, medications, procedures (each sorted by code), then the
// demographics+devices group; every group ends with a missingness indicator
// column.
FeatureCatalog build_catalog(const CohortDataset& train, const SegmentationConfig& seg);

// ---------------------------------------------------------------------------
// Instances.

struct InstanceMeta {
    std::string patient_id;
    TimePoint segment_time;
    int prev_index = -1;  // index of the instance one period earlier, or -1
};

struct InstanceSet {
    std::shared_ptr<const FeatureCatalog> catalog;
    std::vector<InstanceMeta> meta;
    // Row-major (n_instances x n_columns) raw feature values; NaN = missing.
    std::vector<double> features;
    // Row-major (n_instances x n_actions) booleans.
    std::vector<std::uint8_t> actions;

    size_t size() const { return meta.size(); }
    double* feature_row(size_t i) { return features.data() + i * catalog->n_columns(); }
    const double* feature_row(size_t i) const { return features.data() + i * catalog->n_columns(); }
    const std::uint8_t* action_row(size_t i) const { return actions.data() + i * catalog->n_actions(); }
};

// Segments one record and fills features/actions for each instance.
// Feature windows use events with ts <= segment time; action windows are
// half-open [t, t + period).
InstanceSet featurize_record(const PatientRecord& rec,
                             std::shared_ptr<const FeatureCatalog> catalog);

InstanceSet featurize_cohort(const CohortDataset& ds,
                             std::shared_ptr<const FeatureCatalog> catalog);

// Action vector for a single window; exposed for testing and ground-truth
// alignment checks.
std::vector<std::uint8_t> build_action_vector(const PatientRecord& rec, TimePoint t,
                                              std::int64_t period_minutes,
                                              const std::vector<ActionDescriptor>& actions);

// ---------------------------------------------------------------------------
// Standardization. Continuous columns are z-scored with training statistics
// (computed over non-missing values); missing values become 0 after scaling
// and raise the group's missingness indicator (set during vectorization).
// Binary columns pass through. Zero-variance columns map to 0.

struct FeatureScaler {
    std::vector<double> mean;  // per column; 0/1-typed columns hold identity
    std::vector<double> std_dev;
    std::vector<std::uint8_t> scaled;  // 1 if the column is standardized
};

FeatureScaler fit_scaler(const InstanceSet& train);
void apply_scaler(const FeatureScaler& scaler, InstanceSet& instances);

}  // namespace coda
