#include "splat/sat_cache.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "splat/digest.hpp"
#include "splat/errors.hpp"

namespace splat {

CanonicalKey canonicalize(const Assignment& a, const FeatureModel& fm) {
    std::vector<std::pair<int, std::string>> ordered;
    ordered.reserve(a.size());
    for (const auto& [name, value] : a.bindings()) {
        int idx = fm.index_of(name);
        if (idx < 0) throw Error("undeclared feature variable '" + name + "'");
        ordered.emplace_back(idx, name);
    }
    std::sort(ordered.begin(), ordered.end());
    CanonicalKey key;
    key.pairs.reserve(ordered.size());
    for (const auto& [idx, name] : ordered) key.pairs.emplace_back(name, *a.get(name));
    return key;
}

SatTrie::SatTrie(SatTrie&& other) noexcept {
    std::lock_guard lock(other.mutex_);
    root_ = std::move(other.root_);
    other.root_ = std::make_unique<Node>();
    path_count_ = other.path_count_;
    stats_ = other.stats_;
    other.path_count_ = 0;
    other.stats_ = CacheStats{};
}

SatTrie& SatTrie::operator=(SatTrie&& other) noexcept {
    if (this != &other) {
        std::scoped_lock lock(mutex_, other.mutex_);
        root_ = std::move(other.root_);
        other.root_ = std::make_unique<Node>();
        path_count_ = other.path_count_;
        stats_ = other.stats_;
        other.path_count_ = 0;
        other.stats_ = CacheStats{};
    }
    return *this;
}

std::optional<bool> SatTrie::lookup_locked(const CanonicalKey& key) const {
    const Node* node = root_.get();
    for (const auto& pair : key.pairs) {
        auto it = node->children.find(pair);
        if (it == node->children.end()) return std::nullopt;
        node = it->second.get();
    }
    return node->answer;
}

void SatTrie::store_locked(const CanonicalKey& key, bool answer) {
    Node* node = root_.get();
    for (const auto& pair : key.pairs) {
        auto& child = node->children[pair];
        if (!child) child = std::make_unique<Node>();
        node = child.get();
    }
    if (!node->answer) ++path_count_;
    node->answer = answer;
}

std::optional<bool> SatTrie::lookup(const CanonicalKey& key) const {
    std::lock_guard lock(mutex_);
    return lookup_locked(key);
}

void SatTrie::store(const CanonicalKey& key, bool answer) {
    std::lock_guard lock(mutex_);
    store_locked(key, answer);
}

bool SatTrie::is_sat(const FeatureModel& fm, const Assignment& a) {
    auto key = canonicalize(a, fm);
    {
        std::lock_guard lock(mutex_);
        if (auto cached = lookup_locked(key)) {
            ++stats_.hits;
            return *cached;
        }
    }
    bool answer = fm.is_satisfiable(a);
    std::lock_guard lock(mutex_);
    // A concurrent query may have raced us here; both computed the same
    // deterministic answer, so the overwrite is benign.
    store_locked(key, answer);
    ++stats_.misses;
    if (answer)
        ++stats_.sat_count;
    else
        ++stats_.unsat_count;
    return answer;
}

std::size_t SatTrie::path_count() const {
    std::lock_guard lock(mutex_);
    return path_count_;
}

CacheStats SatTrie::stats() const {
    std::lock_guard lock(mutex_);
    return stats_;
}

void SatTrie::reset_stats() {
    std::lock_guard lock(mutex_);
    stats_ = CacheStats{};
}

std::vector<std::pair<CanonicalKey, bool>> SatTrie::entries() const {
    std::lock_guard lock(mutex_);
    std::vector<std::pair<CanonicalKey, bool>> out;
    struct Frame {
        const Node* node;
        CanonicalKey key;
    };
    std::vector<Frame> work;
    work.push_back({root_.get(), {}});
    while (!work.empty()) {
        Frame frame = std::move(work.back());
        work.pop_back();
        if (frame.node->answer) out.emplace_back(frame.key, *frame.node->answer);
        for (const auto& [label, child] : frame.node->children) {
            Frame next{child.get(), frame.key};
            next.key.pairs.push_back(label);
            work.push_back(std::move(next));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

constexpr char kMagic[4] = {'S', 'T', 'R', '1'};

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
    std::uint64_t u64() { return bytes(8); }
    std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)); }

    std::string str(std::size_t n) {
        if (pos_ + n > data_.size()) throw Error("trie file truncated");
        std::string s = data_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    std::string rest() const { return data_.substr(pos_); }
    bool done() const { return pos_ == data_.size(); }

private:
    std::uint64_t bytes(int n) {
        if (pos_ + static_cast<std::size_t>(n) > data_.size()) throw Error("trie file truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::string data_;
    std::size_t pos_ = 0;
};

}  // namespace

void SatTrie::persist(const std::filesystem::path& path, const std::string& model_digest) const {
    auto sorted = entries();  // deterministic content given identical insert sets

    std::string payload;
    put_u32(payload, static_cast<std::uint32_t>(sorted.size()));
    for (const auto& [key, answer] : sorted) {
        put_u32(payload, static_cast<std::uint32_t>(key.pairs.size()));
        for (const auto& [name, value] : key.pairs) {
            put_u32(payload, static_cast<std::uint32_t>(name.size()));
            payload += name;
            payload.push_back(value ? 1 : 0);
        }
        payload.push_back(answer ? 1 : 0);
    }

    std::string header(kMagic, sizeof(kMagic));
    put_u32(header, static_cast<std::uint32_t>(model_digest.size()));
    header += model_digest;
    put_u64(header, fnv1a(payload));

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write trie file " + path.string());
    out << header << payload;
}

SatTrie SatTrie::load(const std::filesystem::path& path, const std::string& model_digest,
                      bool tolerate_corrupt) {
    SatTrie trie;
    std::ifstream in(path, std::ios::binary);
    if (!in) return trie;  // missing file -> empty trie

    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        Reader reader(buf.str());
        if (reader.str(4) != std::string(kMagic, sizeof(kMagic))) throw Error("bad trie file magic");
        auto digest_len = reader.u32();
        std::string stored_digest = reader.str(digest_len);
        auto checksum = reader.u64();
        std::string payload = reader.rest();
        if (fnv1a(payload) != checksum) throw Error("trie file checksum mismatch");
        if (stored_digest != model_digest) return trie;  // stale cache, discard

        Reader records(payload);
        auto count = records.u32();
        for (std::uint32_t i = 0; i < count; ++i) {
            CanonicalKey key;
            auto pairs = records.u32();
            for (std::uint32_t p = 0; p < pairs; ++p) {
                auto len = records.u32();
                std::string name = records.str(len);
                bool value = records.u8() != 0;
                key.pairs.emplace_back(std::move(name), value);
            }
            bool answer = records.u8() != 0;
            trie.store_locked(key, answer);
        }
        if (!records.done()) throw Error("trailing bytes in trie file");
    } catch (const Error&) {
        if (!tolerate_corrupt) throw;
        return SatTrie{};
    }
    return trie;
}

}  // namespace splat
