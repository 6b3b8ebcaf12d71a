#include "coda/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coda/error.hpp"

namespace coda {

bool is_missing(double v) { return std::isnan(v); }

namespace {

double ratio_or_missing(double num, double den) {
    if (den == 0.0 || is_missing(num) || is_missing(den)) return kMissing;
    return num / den;
}

}  // namespace

std::vector<TimePoint> segment_times(TimePoint admission, TimePoint discharge,
                                     const SegmentationConfig& cfg) {
    if (cfg.period_minutes <= 0) throw ValidationError("segmentation period must be positive");
    std::vector<TimePoint> out;
    // First anchor-aligned minute strictly after admission; subsequent points
    // step by the period (equal to daily anchors for a 24 h period).
    std::int64_t day = admission.minutes >= 0 ? admission.minutes / kMinutesPerDay
                                              : (admission.minutes - kMinutesPerDay + 1) / kMinutesPerDay;
    TimePoint t{day * kMinutesPerDay + cfg.anchor_minute_of_day};
    while (t.minutes <= admission.minutes) t.minutes += kMinutesPerDay;
    for (; t < discharge; t.minutes += cfg.period_minutes) out.push_back(t);
    return out;
}

std::vector<double> ContinuousLabFeatures::as_vector() const {
    return {last, second_last, first, last_difference, last_pct_change, last_slope,
            nadir, nadir_difference, nadir_pct_difference, hours_since_nadir,
            apex, apex_difference, apex_pct_difference, hours_since_apex,
            baseline_difference, baseline_pct_difference, overall_slope,
            hours_since_last, hours_since_first, hours_between_last_two,
            count, running_mean, running_std,
            ever_measured, pending_order, measured_within_period};
}

ContinuousLabFeatures extract_continuous_lab_features(const std::vector<TimedValue>& series,
                                                      bool pending, TimePoint t,
                                                      std::int64_t period_minutes) {
    ContinuousLabFeatures f;
    f.pending_order = pending ? 1 : 0;
    const size_t n = series.size();
    f.count = static_cast<double>(n);
    if (n == 0) return f;

    f.ever_measured = 1;
    const TimedValue& a = series.back();
    f.last = a.value;
    f.first = series.front().value;
    f.hours_since_last = minutes_to_hours(t - a.ts);
    f.hours_since_first = minutes_to_hours(t - series.front().ts);
    if (a.ts.minutes > t.minutes - period_minutes) f.measured_within_period = 1;

    double lo = series[0].value, hi = series[0].value;
    TimePoint lo_at = series[0].ts, hi_at = series[0].ts;
    double sum = 0, sum_sq = 0;
    for (const auto& tv : series) {
        if (tv.value <= lo) {
            lo = tv.value;
            lo_at = tv.ts;
        }
        if (tv.value >= hi) {
            hi = tv.value;
            hi_at = tv.ts;
        }
        sum += tv.value;
        sum_sq += tv.value * tv.value;
    }
    f.nadir = lo;
    f.apex = hi;
    f.hours_since_nadir = minutes_to_hours(t - lo_at);
    f.hours_since_apex = minutes_to_hours(t - hi_at);
    f.nadir_difference = f.last - f.nadir;
    f.nadir_pct_difference = ratio_or_missing(f.nadir_difference, f.nadir);
    f.apex_difference = f.last - f.apex;
    f.apex_pct_difference = ratio_or_missing(f.apex_difference, f.apex);
    f.baseline_difference = f.last - f.first;
    f.baseline_pct_difference = ratio_or_missing(f.baseline_difference, f.first);
    f.running_mean = sum / static_cast<double>(n);

    if (n >= 2) {
        const TimedValue& b = series[n - 2];
        f.second_last = b.value;
        f.last_difference = a.value - b.value;
        f.last_pct_change = ratio_or_missing(f.last_difference, b.value);
        f.hours_between_last_two = minutes_to_hours(a.ts - b.ts);
        f.last_slope = ratio_or_missing(f.last_difference, f.hours_between_last_two);
        f.overall_slope =
            ratio_or_missing(f.baseline_difference, minutes_to_hours(a.ts - series.front().ts));
        double var = (sum_sq - sum * sum / static_cast<double>(n)) / static_cast<double>(n - 1);
        f.running_std = std::sqrt(std::max(0.0, var));
    }
    return f;
}

CategoricalLabFeatures extract_categorical_lab_features(const std::vector<TimedToken>& series,
                                                        bool pending, TimePoint t) {
    CategoricalLabFeatures f;
    f.pending_order = pending ? 1 : 0;
    if (series.empty()) return f;
    f.performed = 1;
    f.last = series.back().token;
    f.first = series.front().token;
    if (series.size() >= 2) f.second_last = series[series.size() - 2].token;
    f.hours_since_last = minutes_to_hours(t - series.back().ts);
    f.hours_since_first = minutes_to_hours(t - series.front().ts);
    return f;
}

std::vector<TimePoint> derive_order_changes(const std::vector<TimePoint>& admin_times,
                                            std::int64_t window_minutes, TimePoint now) {
    std::vector<TimePoint> changes;
    bool on = false;
    TimePoint last_admin{0};
    for (const auto& ts : admin_times) {
        if (ts > now) break;
        if (on && ts.minutes - last_admin.minutes > window_minutes) {
            changes.push_back(last_admin + window_minutes);  // lapsed: on -> off
            on = false;
        }
        if (!on) {
            changes.push_back(ts);  // off -> on
            on = true;
        }
        last_admin = ts;
    }
    if (on && now.minutes - last_admin.minutes > window_minutes)
        changes.push_back(last_admin + window_minutes);
    return changes;
}

MedicationFeatures extract_medication_features(const std::vector<TimePoint>& admin_times,
                                               const std::vector<TimePoint>& order_changes,
                                               TimePoint t, std::int64_t currently_on_window) {
    MedicationFeatures f;
    if (admin_times.empty()) return f;
    f.hours_since_first_on = minutes_to_hours(t - admin_times.front());
    f.hours_since_last_on = minutes_to_hours(t - admin_times.back());
    f.currently_on = (t - admin_times.back()) <= currently_on_window ? 1 : 0;
    for (auto it = order_changes.rbegin(); it != order_changes.rend(); ++it) {
        if (*it <= t) {
            f.hours_since_order_change = minutes_to_hours(t - *it);
            break;
        }
    }
    return f;
}

ProcedureFeatures extract_procedure_features(const std::vector<TimePoint>& proc_times,
                                             TimePoint t) {
    ProcedureFeatures f;
    if (proc_times.empty()) return f;
    f.ever_performed = 1;
    f.hours_since_first = minutes_to_hours(t - proc_times.front());
    f.hours_since_last = minutes_to_hours(t - proc_times.back());
    return f;
}

// ---------------------------------------------------------------------------

std::string to_string(GroupKind k) {
    switch (k) {
        case GroupKind::lab_continuous: return "lab_continuous";
        case GroupKind::lab_categorical: return "lab_categorical";
        case GroupKind::medication: return "medication";
        case GroupKind::procedure: return "procedure";
        case GroupKind::demographics: return "demographics";
    }
    return "?";
}

std::string FeatureGroup::label() const {
    return code.empty() ? to_string(kind) : to_string(kind) + ":" + code;
}

std::string to_string(ActionKind k) {
    return k == ActionKind::lab_order ? "lab_order" : "medication_given";
}

ActionKind action_kind_from_string(const std::string& s) {
    if (s == "lab_order") return ActionKind::lab_order;
    if (s == "medication_given") return ActionKind::medication_given;
    throw ParseError("unknown action kind '" + s + "'");
}

std::string ActionDescriptor::label() const { return to_string(kind) + ":" + code; }

std::vector<int> FeatureCatalog::group_columns(int group_id) const {
    std::vector<int> cols;
    for (const auto& fd : features)
        if (fd.group_id == group_id) cols.push_back(fd.column);
    return cols;
}

const FeatureGroup& FeatureCatalog::group_by_id(int group_id) const {
    for (const auto& g : groups)
        if (g.id == group_id) return g;
    throw Error("unknown feature group id " + std::to_string(group_id));
}

namespace {

const char* kContinuousLabFeatureNames[26] = {
    "last_value", "second_to_last_value", "first_value", "last_difference", "last_pct_change",
    "last_slope", "nadir", "nadir_difference", "nadir_pct_difference", "hours_since_nadir",
    "apex", "apex_difference", "apex_pct_difference", "hours_since_apex", "baseline_difference",
    "baseline_pct_difference", "overall_slope", "hours_since_last", "hours_since_first",
    "hours_between_last_two", "measurement_count", "running_mean", "running_std",
    "ever_measured", "pending_order", "measured_within_period"};

bool is_binary_continuous_lab_feature(int i) { return i >= 23; }

void push_feature(FeatureCatalog& cat, int group_id, const std::string& name,
                  FeatureValueType vt, const std::string& units = "") {
    FeatureDescriptor fd;
    fd.column = cat.n_columns();
    fd.group_id = group_id;
    fd.name = name;
    fd.value_type = vt;
    fd.units = units;
    cat.features.push_back(std::move(fd));
}

void push_one_hot_block(FeatureCatalog& cat, int group_id, const std::string& prefix,
                        const std::vector<std::string>& vocab) {
    for (const auto& tok : vocab)
        push_feature(cat, group_id, prefix + "__" + tok, FeatureValueType::binary);
    push_feature(cat, group_id, prefix + "__other", FeatureValueType::binary);
}

std::string units_for(const std::string& name) {
    if (name.rfind("hours_", 0) == 0) return "hours";
    if (name.find("slope") != std::string::npos) return "per_hour";
    return "";
}

}  // namespace

FeatureCatalog build_catalog(const CohortDataset& train, const SegmentationConfig& seg) {
    FeatureCatalog cat;
    cat.segmentation = seg;

    std::set<std::string> lab_codes, med_codes, proc_codes, categorical;
    std::map<std::string, std::set<std::string>> tokens;
    std::set<std::string> sexes, races;
    for (const auto& rec : train.records) {
        sexes.insert(rec.demographics.sex);
        races.insert(rec.demographics.race);
        for (const auto& ev : rec.events) {
            switch (ev.kind) {
                case ChannelKind::lab:
                    lab_codes.insert(ev.code);
                    if (ev.token) {
                        categorical.insert(ev.code);
                        tokens[ev.code].insert(*ev.token);
                    }
                    break;
                case ChannelKind::medication: med_codes.insert(ev.code); break;
                case ChannelKind::procedure: proc_codes.insert(ev.code); break;
                case ChannelKind::device: break;
            }
        }
    }
    cat.sex_vocab.assign(sexes.begin(), sexes.end());
    cat.race_vocab.assign(races.begin(), races.end());

    auto add_group = [&](GroupKind kind, const std::string& code) -> int {
        FeatureGroup g;
        g.id = static_cast<int>(cat.groups.size());
        g.kind = kind;
        g.code = code;
        cat.groups.push_back(g);
        return g.id;
    };

    for (const auto& code : lab_codes) {
        if (categorical.count(code)) {
            int gid = add_group(GroupKind::lab_categorical, code);
            std::vector<std::string> vocab(tokens[code].begin(), tokens[code].end());
            cat.lab_token_vocab[code] = vocab;
            push_one_hot_block(cat, gid, code + "__last_value", vocab);
            push_one_hot_block(cat, gid, code + "__second_to_last_value", vocab);
            push_one_hot_block(cat, gid, code + "__first_value", vocab);
            push_feature(cat, gid, code + "__hours_since_last", FeatureValueType::continuous,
                         "hours");
            push_feature(cat, gid, code + "__performed", FeatureValueType::binary);
            push_feature(cat, gid, code + "__pending_order", FeatureValueType::binary);
            push_feature(cat, gid, code + "__hours_since_first", FeatureValueType::continuous,
                         "hours");
        } else {
            int gid = add_group(GroupKind::lab_continuous, code);
            for (int i = 0; i < 26; ++i) {
                const std::string name = kContinuousLabFeatureNames[i];
                push_feature(cat, gid, code + "__" + name,
                             is_binary_continuous_lab_feature(i) ? FeatureValueType::binary
                                                                 : FeatureValueType::continuous,
                             units_for(name));
            }
        }
        push_feature(cat, cat.groups.back().id, code + "__missing", FeatureValueType::binary);
    }
    for (const auto& code : med_codes) {
        int gid = add_group(GroupKind::medication, code);
        push_feature(cat, gid, code + "__currently_on", FeatureValueType::binary);
        push_feature(cat, gid, code + "__hours_since_first_on", FeatureValueType::continuous,
                     "hours");
        push_feature(cat, gid, code + "__hours_since_last_on", FeatureValueType::continuous,
                     "hours");
        push_feature(cat, gid, code + "__hours_since_order_change", FeatureValueType::continuous,
                     "hours");
        push_feature(cat, gid, code + "__missing", FeatureValueType::binary);
    }
    for (const auto& code : proc_codes) {
        int gid = add_group(GroupKind::procedure, code);
        push_feature(cat, gid, code + "__ever_performed", FeatureValueType::binary);
        push_feature(cat, gid, code + "__hours_since_first", FeatureValueType::continuous, "hours");
        push_feature(cat, gid, code + "__hours_since_last", FeatureValueType::continuous, "hours");
        push_feature(cat, gid, code + "__missing", FeatureValueType::binary);
    }
    {
        int gid = add_group(GroupKind::demographics, "");
        push_one_hot_block(cat, gid, "sex", cat.sex_vocab);
        push_feature(cat, gid, "age_years", FeatureValueType::continuous, "years");
        push_one_hot_block(cat, gid, "race", cat.race_vocab);
        for (int i = 0; i < 4; ++i)
            push_feature(cat, gid, "device_" + std::to_string(i), FeatureValueType::binary);
        push_feature(cat, gid, "demographics__missing", FeatureValueType::binary);
    }

    for (const auto& code : lab_codes)
        cat.actions.push_back({ActionKind::lab_order, code});
    for (const auto& code : med_codes)
        cat.actions.push_back({ActionKind::medication_given, code});
    std::sort(cat.actions.begin(), cat.actions.end());
    return cat;
}

// ---------------------------------------------------------------------------

namespace {

struct RecordIndex {
    std::map<std::string, std::vector<TimedValue>> lab_values;
    std::map<std::string, std::vector<TimedToken>> lab_tokens;
    std::map<std::string, std::vector<TimePoint>> lab_pending;   // pending-status orders
    std::map<std::string, std::vector<TimePoint>> lab_resulted;  // value/token results
    std::map<std::string, std::vector<TimePoint>> lab_any;       // any event for the code
    std::map<std::string, std::vector<TimePoint>> med_admins;
    std::map<std::string, std::vector<TimePoint>> proc_times;

    explicit RecordIndex(const PatientRecord& rec) {
        for (const auto& ev : rec.events) {
            switch (ev.kind) {
                case ChannelKind::lab:
                    lab_any[ev.code].push_back(ev.ts);
                    if (ev.value) {
                        lab_values[ev.code].push_back({ev.ts, *ev.value});
                        lab_resulted[ev.code].push_back(ev.ts);
                    } else if (ev.token) {
                        lab_tokens[ev.code].push_back({ev.ts, *ev.token});
                        lab_resulted[ev.code].push_back(ev.ts);
                    }
                    if (ev.status && *ev.status == OrderStatus::pending)
                        lab_pending[ev.code].push_back(ev.ts);
                    break;
                case ChannelKind::medication: med_admins[ev.code].push_back(ev.ts); break;
                case ChannelKind::procedure: proc_times[ev.code].push_back(ev.ts); break;
                case ChannelKind::device: break;
            }
        }
    }

    // An order is pending at t if a pending event precedes t with no result
    // for the code in between.
    bool pending_at(const std::string& code, TimePoint t) const {
        auto pit = lab_pending.find(code);
        if (pit == lab_pending.end()) return false;
        TimePoint last_pending{std::numeric_limits<std::int64_t>::min()};
        bool found = false;
        for (const auto& ts : pit->second) {
            if (ts <= t) {
                last_pending = ts;
                found = true;
            }
        }
        if (!found) return false;
        auto rit = lab_resulted.find(code);
        if (rit == lab_resulted.end()) return true;
        for (const auto& ts : rit->second)
            if (last_pending < ts && ts <= t) return false;
        return true;
    }
};

template <typename T>
std::vector<T> upto(const std::vector<T>& sorted, TimePoint t) {
    std::vector<T> out;
    for (const auto& item : sorted) {
        TimePoint ts;
        if constexpr (std::is_same_v<T, TimePoint>) ts = item;
        else ts = item.ts;
        if (ts <= t) out.push_back(item);
        else break;
    }
    return out;
}

void encode_one_hot(double* row, int base, const std::vector<std::string>& vocab,
                    const std::optional<std::string>& token) {
    const int width = static_cast<int>(vocab.size()) + 1;
    for (int i = 0; i < width; ++i) row[base + i] = 0;
    if (!token) return;
    auto it = std::find(vocab.begin(), vocab.end(), *token);
    if (it == vocab.end()) row[base + width - 1] = 1;  // "other" bucket
    else row[base + static_cast<int>(it - vocab.begin())] = 1;
}

}  // namespace

std::vector<std::uint8_t> build_action_vector(const PatientRecord& rec, TimePoint t,
                                              std::int64_t period_minutes,
                                              const std::vector<ActionDescriptor>& actions) {
    std::vector<std::uint8_t> out(actions.size(), 0);
    const TimePoint end = t + period_minutes;
    for (const auto& ev : rec.events) {
        if (ev.ts < t || end <= ev.ts) continue;
        ChannelKind want;
        for (size_t i = 0; i < actions.size(); ++i) {
            want = actions[i].kind == ActionKind::lab_order ? ChannelKind::lab
                                                            : ChannelKind::medication;
            if (ev.kind == want && ev.code == actions[i].code) out[i] = 1;
        }
    }
    return out;
}

InstanceSet featurize_record(const PatientRecord& rec,
                             std::shared_ptr<const FeatureCatalog> catalog) {
    const FeatureCatalog& cat = *catalog;
    InstanceSet set;
    set.catalog = catalog;
    const auto times = segment_times(rec.admission, rec.discharge, cat.segmentation);
    const int ncol = cat.n_columns();
    const int nact = cat.n_actions();
    set.features.assign(times.size() * ncol, 0.0);
    set.actions.assign(times.size() * nact, 0);
    set.meta.resize(times.size());

    RecordIndex index(rec);
    const std::int64_t period = cat.segmentation.period_minutes;

    for (size_t k = 0; k < times.size(); ++k) {
        const TimePoint t = times[k];
        auto& meta = set.meta[k];
        meta.patient_id = rec.patient_id;
        meta.segment_time = t;
        meta.prev_index =
            k > 0 && times[k] - times[k - 1] == period ? static_cast<int>(k) - 1 : -1;

        double* row = set.feature_row(k);
        int col = 0;
        for (const auto& g : cat.groups) {
            bool missing_any = false;
            auto put = [&](double v) {
                if (is_missing(v)) missing_any = true;
                row[col++] = v;
            };
            switch (g.kind) {
                case GroupKind::lab_continuous: {
                    static const std::vector<TimedValue> kEmptyValues;
                    auto it = index.lab_values.find(g.code);
                    auto series = upto(it == index.lab_values.end() ? kEmptyValues : it->second, t);
                    auto f = extract_continuous_lab_features(series, index.pending_at(g.code, t),
                                                             t, period);
                    for (double v : f.as_vector()) put(v);
                    break;
                }
                case GroupKind::lab_categorical: {
                    static const std::vector<TimedToken> kEmptyTokens;
                    auto it = index.lab_tokens.find(g.code);
                    auto series = upto(it == index.lab_tokens.end() ? kEmptyTokens : it->second, t);
                    auto f = extract_categorical_lab_features(series, index.pending_at(g.code, t),
                                                              t);
                    const auto& vocab = cat.lab_token_vocab.at(g.code);
                    const int width = static_cast<int>(vocab.size()) + 1;
                    encode_one_hot(row, col, vocab, f.last);
                    col += width;
                    encode_one_hot(row, col, vocab, f.second_last);
                    col += width;
                    encode_one_hot(row, col, vocab, f.first);
                    col += width;
                    if (!f.last || !f.second_last || !f.first) missing_any = true;
                    put(f.hours_since_last);
                    put(f.performed);
                    put(f.pending_order);
                    put(f.hours_since_first);
                    break;
                }
                case GroupKind::medication: {
                    static const std::vector<TimePoint> kEmptyTimes;
                    auto it = index.med_admins.find(g.code);
                    auto admins = upto(it == index.med_admins.end() ? kEmptyTimes : it->second, t);
                    auto changes = derive_order_changes(admins, period, t);
                    auto f = extract_medication_features(admins, changes, t, period);
                    put(f.currently_on);
                    put(f.hours_since_first_on);
                    put(f.hours_since_last_on);
                    put(f.hours_since_order_change);
                    break;
                }
                case GroupKind::procedure: {
                    static const std::vector<TimePoint> kEmptyTimes;
                    auto it = index.proc_times.find(g.code);
                    auto procs = upto(it == index.proc_times.end() ? kEmptyTimes : it->second, t);
                    auto f = extract_procedure_features(procs, t);
                    put(f.ever_performed);
                    put(f.hours_since_first);
                    put(f.hours_since_last);
                    break;
                }
                case GroupKind::demographics: {
                    const int sex_width = static_cast<int>(cat.sex_vocab.size()) + 1;
                    encode_one_hot(row, col, cat.sex_vocab, rec.demographics.sex);
                    col += sex_width;
                    put(rec.demographics.age);
                    const int race_width = static_cast<int>(cat.race_vocab.size()) + 1;
                    encode_one_hot(row, col, cat.race_vocab, rec.demographics.race);
                    col += race_width;
                    for (int i = 0; i < 4; ++i) put(rec.device_flags[i] ? 1 : 0);
                    break;
                }
            }
            row[col++] = missing_any ? 1 : 0;  // group missingness indicator
        }
        if (col != ncol)
            throw Error("catalog column count mismatch while featurizing");

        auto acts = build_action_vector(rec, t, period, cat.actions);
        std::copy(acts.begin(), acts.end(), set.actions.begin() + k * nact);
    }
    return set;
}

InstanceSet featurize_cohort(const CohortDataset& ds,
                             std::shared_ptr<const FeatureCatalog> catalog) {
    InstanceSet all;
    all.catalog = catalog;
    for (const auto& rec : ds.records) {
        InstanceSet one = featurize_record(rec, catalog);
        const int offset = static_cast<int>(all.meta.size());
        for (auto& m : one.meta) {
            if (m.prev_index >= 0) m.prev_index += offset;
            all.meta.push_back(std::move(m));
        }
        all.features.insert(all.features.end(), one.features.begin(), one.features.end());
        all.actions.insert(all.actions.end(), one.actions.begin(), one.actions.end());
    }
    return all;
}

FeatureScaler fit_scaler(const InstanceSet& train) {
    const FeatureCatalog& cat = *train.catalog;
    const int ncol = cat.n_columns();
    FeatureScaler s;
    s.mean.assign(ncol, 0.0);
    s.std_dev.assign(ncol, 0.0);
    s.scaled.assign(ncol, 0);
    for (int c = 0; c < ncol; ++c) {
        if (cat.features[c].value_type != FeatureValueType::continuous) continue;
        s.scaled[c] = 1;
        double sum = 0;
        size_t n = 0;
        for (size_t r = 0; r < train.size(); ++r) {
            double v = train.feature_row(r)[c];
            if (!is_missing(v)) {
                sum += v;
                ++n;
            }
        }
        if (n == 0) continue;  // all-missing: zero-variance path
        const double mean = sum / static_cast<double>(n);
        double ss = 0;
        for (size_t r = 0; r < train.size(); ++r) {
            double v = train.feature_row(r)[c];
            if (!is_missing(v)) ss += (v - mean) * (v - mean);
        }
        s.mean[c] = mean;
        s.std_dev[c] = n >= 2 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    }
    return s;
}

void apply_scaler(const FeatureScaler& scaler, InstanceSet& instances) {
    const int ncol = instances.catalog->n_columns();
    if (static_cast<int>(scaler.mean.size()) != ncol)
        throw ValidationError("scaler does not match the feature catalog");
    for (size_t r = 0; r < instances.size(); ++r) {
        double* row = instances.feature_row(r);
        for (int c = 0; c < ncol; ++c) {
            if (!scaler.scaled[c]) continue;
            const double v = row[c];
            if (is_missing(v) || scaler.std_dev[c] <= 1e-12) row[c] = 0.0;
            else row[c] = (v - scaler.mean[c]) / scaler.std_dev[c];
        }
    }
}

}  // namespace coda
