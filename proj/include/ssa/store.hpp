#ifndef SSA_STORE_HPP
#define SSA_STORE_HPP

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "ssa/state.hpp"

namespace ssa {

/// Append-only newline-delimited JSON event log.
///
/// Opening a log validates every record: sequence numbers must start at 1
/// and be gap-free. A torn trailing record (no newline, or an unparsable
/// last line) is the footprint of an interrupted append; it is truncated and
/// reported through truncated_bytes(). Damage anywhere else is CorruptLog.
class EventLog {
public:
    // In-memory log (no durability); used by tests and the simulator.
    EventLog() = default;
    explicit EventLog(std::filesystem::path path);
    ~EventLog();

    EventLog(const EventLog&) = delete;
    EventLog& operator=(const EventLog&) = delete;
    EventLog(EventLog&&) = delete;
    EventLog& operator=(EventLog&&) = delete;

    /// Validates the payload, writes and fsyncs the record, then returns its seq.
    std::uint64_t append(EventKind kind, const json& payload, std::string timestamp);

    const std::vector<EventRecord>& records() const { return records_; }
    std::uint64_t last_seq() const { return records_.empty() ? 0 : records_.back().seq; }
    std::uint64_t truncated_bytes() const { return truncated_bytes_; }
    bool persistent() const { return fd_ >= 0; }
    const std::filesystem::path& path() const { return path_; }

private:
    void load();

    std::filesystem::path path_;
    int fd_ = -1;
    std::vector<EventRecord> records_;
    std::uint64_t truncated_bytes_ = 0;
};

/// Parse a whole log image. Only the final line may be torn; `torn_bytes`
/// receives its length (0 if the log is clean).
std::vector<EventRecord> parse_log(const std::string& contents, std::uint64_t& torn_bytes);

inline constexpr int kSnapshotVersion = 1;

struct Snapshot {
    std::uint64_t seq = 0;
    json state;
};

void write_snapshot(const std::filesystem::path& path, const AgentState& state);
Snapshot read_snapshot(const std::filesystem::path& path);
AgentState load_snapshot(const Snapshot& snapshot, std::shared_ptr<const Settings> settings);

/// Snapshot (if any) plus the log records after it.
AgentState restore(std::shared_ptr<const Settings> settings, const std::vector<EventRecord>& log,
                   const Snapshot* snapshot);

}  // namespace ssa

#endif  // SSA_STORE_HPP
