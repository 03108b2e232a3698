#include "ictus/recording.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ictus/detail/binary_io.hpp"
#include "ictus/error.hpp"
#include "ictus/text.hpp"

namespace ictus {

namespace {

constexpr char kRecordingMagic[8] = {'I', 'C', 'T', 'U', 'S', 'R', 'E', 'C'};
constexpr std::uint32_t kRecordingVersion = 1;

}  // namespace

void Recording::validate() const {
    if (!(sampling_rate_hz > 0.0) || !std::isfinite(sampling_rate_hz)) {
        throw ValidationError("sampling rate must be positive and finite");
    }
    if (samples.empty()) throw ValidationError("no samples");
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!std::isfinite(samples[i])) {
            throw ValidationError("non-finite sample at index " + std::to_string(i));
        }
    }
    if (seizure_onsets_s.size() != seizure_offsets_s.size()) {
        throw ValidationError("annotation order: onset/offset count mismatch");
    }
    const double duration = duration_s();
    for (std::size_t i = 0; i < seizure_onsets_s.size(); ++i) {
        const double on = seizure_onsets_s[i];
        const double off = seizure_offsets_s[i];
        if (!(off > on)) {
            throw ValidationError("annotation order: seizure " + std::to_string(i) + " offset not after onset");
        }
        if (i > 0 && !(on > seizure_offsets_s[i - 1])) {
            throw ValidationError("annotation order: seizure " + std::to_string(i) +
                                  " starts before previous seizure ends");
        }
        if (on < 0.0 || off > duration) {
            throw ValidationError("annotation outside recording: seizure " + std::to_string(i));
        }
    }
}

RecordingFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? RecordingFormat::csv : RecordingFormat::bin;
}

namespace {

Recording load_csv(std::istream& in) {
    Recording rec;
    bool have_rate = false;
    bool have_channel = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty()) continue;
        if (view.front() == '#') {
            const std::string_view body = trim(view.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) {
                throw ValidationError("malformed header at line " + std::to_string(line_no));
            }
            const std::string_view key = trim(body.substr(0, eq));
            const std::string_view value = trim(body.substr(eq + 1));
            if (key == "rate") {
                rec.sampling_rate_hz = parse_double(value, "rate");
                have_rate = true;
            } else if (key == "channel") {
                rec.channel_label = std::string(value);
                have_channel = true;
            } else if (key == "config_hash") {
                rec.config_hash = parse_hex64(value);
            } else if (key == "id") {
                rec.id = std::string(value);
            } else if (key == "seizure") {
                const auto parts = split(value, ',');
                if (parts.size() != 2) {
                    throw ValidationError("malformed header: seizure needs onset,offset at line " +
                                          std::to_string(line_no));
                }
                rec.seizure_onsets_s.push_back(parse_double(parts[0], "seizure onset"));
                rec.seizure_offsets_s.push_back(parse_double(parts[1], "seizure offset"));
            } else {
                throw ValidationError("malformed header: unknown key '" + std::string(key) + "'");
            }
            continue;
        }
        double v = 0.0;
        const auto* first = view.data();
        const auto* last = view.data() + view.size();
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last) {
            throw ValidationError("unparseable sample at index " + std::to_string(rec.samples.size()));
        }
        rec.samples.push_back(v);
    }
    if (!have_rate) throw ValidationError("malformed header: missing '# rate='");
    if (!have_channel) throw ValidationError("malformed header: missing '# channel='");
    return rec;
}

Recording load_bin(std::istream& in) {
    using namespace detail;
    expect_magic(in, kRecordingMagic, sizeof(kRecordingMagic), "recording");
    const auto version = read_le<std::uint32_t>(in);
    if (version != kRecordingVersion) {
        throw ValidationError("unsupported recording version " + std::to_string(version));
    }
    Recording rec;
    rec.id = read_string(in);
    rec.channel_label = read_string(in);
    rec.sampling_rate_hz = read_f64(in);
    rec.config_hash = read_le<std::uint64_t>(in);
    const auto seizures = read_le<std::uint64_t>(in);
    if (seizures > (1u << 20)) throw ValidationError("implausible seizure count");
    for (std::uint64_t i = 0; i < seizures; ++i) {
        rec.seizure_onsets_s.push_back(read_f64(in));
        rec.seizure_offsets_s.push_back(read_f64(in));
    }
    const auto n = read_le<std::uint64_t>(in);
    if (n > (std::uint64_t{1} << 34)) throw ValidationError("implausible sample count");
    rec.samples.resize(n);
    for (auto& s : rec.samples) s = read_f64(in);
    return rec;
}

}  // namespace

Recording load_recording(const std::filesystem::path& path, RecordingFormat format) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open recording " + path.string());
    Recording rec = format == RecordingFormat::csv ? load_csv(in) : load_bin(in);
    if (rec.id.empty()) rec.id = path.stem().string();
    rec.validate();
    return rec;
}

Recording load_recording(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open recording " + path.string());
    char head[sizeof(kRecordingMagic)] = {};
    in.read(head, sizeof(head));
    const bool binary = in.gcount() == static_cast<std::streamsize>(sizeof(head)) &&
                        std::equal(head, head + sizeof(head), kRecordingMagic);
    return load_recording(path, binary ? RecordingFormat::bin : RecordingFormat::csv);
}

void save_recording(const Recording& rec, const std::filesystem::path& path, RecordingFormat format) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write recording " + path.string());
    if (format == RecordingFormat::csv) {
        out << "# id=" << rec.id << '\n';
        out << "# channel=" << rec.channel_label << '\n';
        out << "# rate=" << format_g17(rec.sampling_rate_hz) << '\n';
        if (rec.config_hash != 0) out << "# config_hash=" << hex64(rec.config_hash) << '\n';
        for (std::size_t i = 0; i < rec.seizure_count(); ++i) {
            out << "# seizure=" << format_g17(rec.seizure_onsets_s[i]) << ','
                << format_g17(rec.seizure_offsets_s[i]) << '\n';
        }
        for (double s : rec.samples) out << format_g17(s) << '\n';
    } else {
        using namespace detail;
        out.write(kRecordingMagic, sizeof(kRecordingMagic));
        write_le(out, kRecordingVersion);
        write_string(out, rec.id);
        write_string(out, rec.channel_label);
        write_f64(out, rec.sampling_rate_hz);
        write_le(out, rec.config_hash);
        write_le(out, static_cast<std::uint64_t>(rec.seizure_count()));
        for (std::size_t i = 0; i < rec.seizure_count(); ++i) {
            write_f64(out, rec.seizure_onsets_s[i]);
            write_f64(out, rec.seizure_offsets_s[i]);
        }
        write_le(out, static_cast<std::uint64_t>(rec.samples.size()));
        for (double s : rec.samples) write_f64(out, s);
    }
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

void SeizureSplit::validate(std::size_t seizure_count) const {
    std::set<std::size_t> seen;
    for (const auto* list : {&train_indices, &test_indices}) {
        for (std::size_t idx : *list) {
            if (idx >= seizure_count) {
                throw ValidationError("split index " + std::to_string(idx) + " out of range");
            }
            if (!seen.insert(idx).second) {
                throw ValidationError("split index " + std::to_string(idx) + " assigned twice");
            }
        }
    }
    if (seen.size() != seizure_count) throw ValidationError("split does not cover every seizure");
    if (train_indices.empty() || test_indices.empty()) {
        throw ValidationError("split needs at least one train and one test seizure");
    }
}

SeizureSplit default_split(const Recording& rec) {
    const std::size_t n = rec.seizure_count();
    if (n < 3) {
        throw ValidationError("default split needs at least 3 seizures, recording has " + std::to_string(n));
    }
    const std::size_t n_train = (2 * n + 2) / 3;
    SeizureSplit split{rec.id, {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
        (i < n_train ? split.train_indices : split.test_indices).push_back(i);
    }
    return split;
}

SeizureSplit make_split(const Recording& rec, std::vector<std::size_t> train, std::vector<std::size_t> test) {
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    SeizureSplit split{rec.id, std::move(train), std::move(test)};
    split.validate(rec.seizure_count());
    return split;
}

namespace {

std::string join_indices(const std::vector<std::size_t>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::vector<std::size_t> parse_indices(std::string_view text) {
    std::vector<std::size_t> out;
    if (trim(text).empty()) return out;
    for (auto part : split(text, ',')) out.push_back(parse_size(part, "seizure index"));
    return out;
}

}  // namespace

void save_split(const SeizureSplit& split, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write split " + path.string());
    out << "recording=" << split.recording_id << '\n';
    out << "train=" << join_indices(split.train_indices) << '\n';
    out << "test=" << join_indices(split.test_indices) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

SeizureSplit load_split(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open split " + path.string());
    SeizureSplit split;
    std::string line;
    while (std::getline(in, line)) {
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const auto eq = view.find('=');
        if (eq == std::string_view::npos) throw ValidationError("malformed split line: " + line);
        const auto key = trim(view.substr(0, eq));
        const auto value = trim(view.substr(eq + 1));
        if (key == "recording") {
            split.recording_id = std::string(value);
        } else if (key == "train") {
            split.train_indices = parse_indices(value);
        } else if (key == "test") {
            split.test_indices = parse_indices(value);
        } else {
            throw ValidationError("unknown split key '" + std::string(key) + "'");
        }
    }
    return split;
}

}  // namespace ictus
