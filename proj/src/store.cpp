#include "ssa/store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ssa/error.hpp"

namespace ssa {

namespace {

[[noreturn]] void storage_error(const std::string& what) {
    throw Error(ErrorCode::StorageError, what + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& data) {
    const char* p = data.data();
    std::size_t left = data.size();
    while (left > 0) {
        ssize_t n = ::write(fd, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            storage_error("event log write failed");
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
}

}  // namespace

std::vector<EventRecord> parse_log(const std::string& contents, std::uint64_t& torn_bytes) {
    std::vector<EventRecord> records;
    torn_bytes = 0;
    std::size_t pos = 0;
    while (pos < contents.size()) {
        const auto nl = contents.find('\n', pos);
        const bool last = nl == std::string::npos || nl + 1 == contents.size();
        const std::string line = contents.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        const std::uint64_t expected = records.empty() ? 1 : records.back().seq + 1;
        EventRecord rec;
        bool ok = true;
        try {
            rec = json::parse(line).get<EventRecord>();
            validate_payload(rec.kind, rec.payload);
        } catch (const std::exception&) {
            ok = false;
        }
        if (!ok || nl == std::string::npos) {
            // A record without its newline was never acknowledged.
            if (last) {
                torn_bytes = contents.size() - pos;
                break;
            }
            throw Error(ErrorCode::CorruptLog, "unparsable event record at seq " + std::to_string(expected),
                        std::to_string(expected));
        }
        if (rec.seq != expected) {
            throw Error(ErrorCode::CorruptLog,
                        "sequence gap: expected seq " + std::to_string(expected) + ", found " + std::to_string(rec.seq),
                        std::to_string(expected));
        }
        records.push_back(std::move(rec));
        pos = nl + 1;
    }
    return records;
}

EventLog::EventLog(std::filesystem::path path) : path_(std::move(path)) { load(); }

EventLog::~EventLog() {
    if (fd_ >= 0) ::close(fd_);
}

void EventLog::load() {
    std::string contents;
    if (std::filesystem::exists(path_)) {
        std::ifstream in(path_, std::ios::binary);
        if (!in) storage_error("cannot read event log " + path_.string());
        std::ostringstream ss;
        ss << in.rdbuf();
        contents = ss.str();
    }
    records_ = parse_log(contents, truncated_bytes_);
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) storage_error("cannot open event log " + path_.string());
    if (truncated_bytes_ > 0) {
        if (::ftruncate(fd_, static_cast<off_t>(contents.size() - truncated_bytes_)) != 0)
            storage_error("cannot truncate torn event record");
        if (::fsync(fd_) != 0) storage_error("fsync failed");
    }
}

std::uint64_t EventLog::append(EventKind kind, const json& payload, std::string timestamp) {
    validate_payload(kind, payload);
    EventRecord rec{last_seq() + 1, std::move(timestamp), kind, payload};
    if (fd_ >= 0) {
        write_all(fd_, json(rec).dump() + "\n");
        if (::fsync(fd_) != 0) storage_error("fsync failed");
    }
    records_.push_back(std::move(rec));
    return records_.back().seq;
}

void write_snapshot(const std::filesystem::path& path, const AgentState& state) {
    const json doc{{"format", "ssa-snapshot"},
                   {"version", kSnapshotVersion},
                   {"seq", state.last_seq},
                   {"state", state_to_json(state)}};
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) storage_error("cannot write snapshot " + tmp.string());
        out << doc.dump() << '\n';
        out.flush();
        if (!out) storage_error("cannot write snapshot " + tmp.string());
    }
    int fd = ::open(tmp.c_str(), O_RDONLY | O_CLOEXEC);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::StorageError, "cannot install snapshot: " + ec.message());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) storage_error("cannot read snapshot " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::StorageError, "snapshot " + path.string() + " is not valid JSON: " + e.what());
    }
    if (doc.value("format", "") != "ssa-snapshot" || doc.value("version", -1) != kSnapshotVersion) {
        throw Error(ErrorCode::SnapshotVersionMismatch, "snapshot " + path.string() + " has format/version " +
                                                            doc.value("format", std::string("?")) + "/" +
                                                            std::to_string(doc.value("version", -1)) + ", expected " +
                                                            "ssa-snapshot/" + std::to_string(kSnapshotVersion));
    }
    return Snapshot{doc.at("seq").get<std::uint64_t>(), doc.at("state")};
}

AgentState load_snapshot(const Snapshot& snapshot, std::shared_ptr<const Settings> settings) {
    try {
        auto s = state_from_json(snapshot.state, std::move(settings));
        if (s.last_seq != snapshot.seq)
            throw Error(ErrorCode::StorageError, "snapshot seq does not match its state");
        return s;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::StorageError, std::string("snapshot state is malformed: ") + e.what());
    }
}

AgentState restore(std::shared_ptr<const Settings> settings, const std::vector<EventRecord>& log,
                   const Snapshot* snapshot) {
    if (snapshot && snapshot->seq > (log.empty() ? 0 : log.back().seq)) {
        throw Error(ErrorCode::CorruptLog, "snapshot covers seq " + std::to_string(snapshot->seq) +
                                               " but the log ends earlier");
    }
    AgentState s = snapshot ? load_snapshot(*snapshot, settings) : initial_state(settings);
    for (const auto& e : log) {
        if (e.seq <= s.last_seq) continue;
        s = apply(s, e);
    }
    return s;
}

}  // namespace ssa
