#pragma once

// Documents, labels, and word segmentation.

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

#include "ewom/csv.hpp"
#include "ewom/error.hpp"

namespace ewom {

using TopicId = std::string;

struct Topic {
    TopicId id;
    std::string name;
};

/// The eight tweet topics used for roadside-station posts.
inline std::vector<Topic> default_topic_catalog() {
    return {{"T1", "Products and Services"}, {"T2", "Special Events"},
            {"T3", "Promotional"},           {"T4", "Traffic and Weather"},
            {"T5", "Check-in"},              {"T6", "Positive Reviews"},
            {"T7", "Motorcycles"},           {"T8", "Unrelated and Others"}};
}

struct Document {
    std::string id;
    std::string text;
    std::string author;
    std::optional<std::string> station_id;
    std::vector<std::string> tokens;

    bool operator==(const Document&) const = default;
};

class LabeledCorpus {
public:
    LabeledCorpus() = default;

    LabeledCorpus(std::vector<Document> documents, std::map<std::string, std::set<TopicId>> labels,
                  std::vector<Topic> catalog)
        : documents_(std::move(documents)), labels_(std::move(labels)), catalog_(std::move(catalog)) {
        for (std::size_t i = 0; i < documents_.size(); ++i) {
            if (!index_.emplace(documents_[i].id, i).second)
                throw ContractError("duplicate document id '" + documents_[i].id + "'");
        }
        std::set<TopicId> known;
        for (const auto& t : catalog_) known.insert(t.id);
        for (const auto& [id, topics] : labels_) {
            if (!index_.count(id)) throw ContractError("label references unknown document id '" + id + "'");
            for (const auto& t : topics)
                if (!known.count(t)) throw ContractError("unknown topic id '" + t + "' for document '" + id + "'");
        }
    }

    const std::vector<Document>& documents() const noexcept { return documents_; }
    const std::map<std::string, std::set<TopicId>>& labels() const noexcept { return labels_; }
    const std::vector<Topic>& catalog() const noexcept { return catalog_; }

    bool in_catalog(const TopicId& topic) const {
        for (const auto& t : catalog_)
            if (t.id == topic) return true;
        return false;
    }

    const Document* find(const std::string& id) const {
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &documents_[it->second];
    }

    const std::set<TopicId>& labels_of(const std::string& id) const {
        static const std::set<TopicId> none;
        auto it = labels_.find(id);
        return it == labels_.end() ? none : it->second;
    }

    bool has_label(const std::string& id, const TopicId& topic) const { return labels_of(id).count(topic) > 0; }

    /// M for a topic: number of documents carrying the label.
    std::size_t partition_size(const TopicId& topic) const {
        std::size_t m = 0;
        for (const auto& d : documents_) m += has_label(d.id, topic);
        return m;
    }

private:
    std::vector<Document> documents_;
    std::map<std::string, std::set<TopicId>> labels_;
    std::vector<Topic> catalog_;
    std::map<std::string, std::size_t> index_;
};

enum class DocumentFormat { jsonl, csv };

namespace detail {

inline void check_unique(const std::vector<Document>& docs, const std::string& source) {
    std::unordered_set<std::string> seen;
    for (const auto& d : docs)
        if (!seen.insert(d.id).second) throw ContractError(source + ": duplicate document id '" + d.id + "'");
}

inline std::vector<Document> parse_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractError("cannot open " + path.string());
    std::vector<Document> docs;
    std::string line;
    const std::string fname = path.filename().string();
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw ContractError(where + ": malformed JSON record");
        }
        if (!j.is_object()) throw ContractError(where + ": record is not an object");
        auto text = j.find("text");
        if (text == j.end() || !text->is_string()) throw ContractError(where + ": missing string field 'text'");
        Document d;
        d.text = text->get<std::string>();
        if (auto id = j.find("id"); id != j.end() && !id->is_null()) {
            if (!id->is_string()) throw ContractError(where + ": field 'id' must be a string");
            d.id = id->get<std::string>();
        } else {
            d.id = fname + ":" + std::to_string(lineno);
        }
        if (auto a = j.find("author"); a != j.end() && !a->is_null()) {
            if (!a->is_string()) throw ContractError(where + ": field 'author' must be a string");
            d.author = a->get<std::string>();
        }
        if (auto s = j.find("station_id"); s != j.end() && !s->is_null()) {
            if (!s->is_string()) throw ContractError(where + ": field 'station_id' must be a string");
            d.station_id = s->get<std::string>();
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

inline std::vector<Document> parse_csv(const std::filesystem::path& path) {
    const auto rows = csv::read(path);
    std::vector<Document> docs;
    if (rows.empty()) return docs;
    const auto& header = rows.front().fields;
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    };
    const auto text = column("text");
    if (!text) throw ContractError(path.string() + ":1: header lacks a 'text' column");
    const auto id = column("id");
    const auto author = column("author");
    const auto station = column("station_id");
    const std::string fname = path.filename().string();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size())
            throw ContractError(path.string() + ":" + std::to_string(row.line) + ": expected " +
                                std::to_string(header.size()) + " fields");
        Document d;
        d.text = row.fields[*text];
        d.id = id && !row.fields[*id].empty() ? row.fields[*id] : fname + ":" + std::to_string(row.line);
        if (author) d.author = row.fields[*author];
        if (station && !row.fields[*station].empty()) d.station_id = row.fields[*station];
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace detail

inline std::vector<Document> load_documents(const std::filesystem::path& path, DocumentFormat format) {
    auto docs = format == DocumentFormat::jsonl ? detail::parse_jsonl(path) : detail::parse_csv(path);
    detail::check_unique(docs, path.string());
    return docs;
}

inline DocumentFormat format_from_extension(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? DocumentFormat::csv : DocumentFormat::jsonl;
}

inline void save_documents(const std::vector<Document>& docs, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractError("cannot write " + path.string());
    for (const auto& d : docs) {
        nlohmann::ordered_json j;
        j["id"] = d.id;
        j["text"] = d.text;
        j["author"] = d.author;
        if (d.station_id) j["station_id"] = *d.station_id;
        try {
            out << j.dump() << '\n';
        } catch (const nlohmann::json::type_error&) {
            throw ContractError("document '" + d.id + "' is not valid UTF-8");
        }
    }
}

// ---------------------------------------------------------------------------
// Segmentation

struct SegmenterSpec {
    enum class Kind { whitespace_regex, external_command };

    Kind kind = Kind::whitespace_regex;
    /// Drop words in `stop_words`; stands in for part-of-speech filtering.
    bool self_sufficient_only = false;
    std::set<std::string> stop_words;
    /// For external_command: `{input}` is replaced with a file holding the text,
    /// otherwise the file is fed on stdin.
    std::string command;

    static SegmenterSpec external(std::string command) {
        if (command.empty()) throw ContractError("external segmenter requires a command template");
        SegmenterSpec s;
        s.kind = Kind::external_command;
        s.command = std::move(command);
        return s;
    }
};

inline std::set<std::string> load_stop_words(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ContractError("cannot open " + path.string());
    std::set<std::string> words;
    for (std::string w; std::getline(in, w);) {
        while (!w.empty() && (w.back() == '\r' || w.back() == ' ')) w.pop_back();
        if (!w.empty()) words.insert(w);
    }
    return words;
}

namespace detail {

// Code points treated as separators: ASCII non-alphanumerics plus common
// Latin-1, general, CJK and fullwidth punctuation blocks.
inline bool is_word_codepoint(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    if (cp <= 0xBF || cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x206F) return false;
    if (cp >= 0x3000 && cp <= 0x303F) return false;
    if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) || (cp >= 0xFF3B && cp <= 0xFF40) ||
        (cp >= 0xFF5B && cp <= 0xFF65))
        return false;
    return true;
}

// Decodes one UTF-8 sequence at `i`; invalid bytes decode as themselves.
inline std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xE ? 3 : (b0 >> 3) == 0x1E ? 4 : 1;
    if (i + len > s.size()) len = 1;
    if (len == 1) {
        cp = b0;
        return 1;
    }
    cp = b0 & (0xFF >> (len + 1));
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b >> 6) != 0x2) {
            cp = b0;
            return 1;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    return static_cast<std::size_t>(len);
}

inline std::vector<std::string> regex_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t i = 0; i < text.size();) {
        char32_t cp = 0;
        const std::size_t len = decode_utf8(text, i, cp);
        if (is_word_codepoint(cp)) {
            if (len == 1 && cp >= 'A' && cp <= 'Z')
                current.push_back(static_cast<char>(cp - 'A' + 'a'));
            else
                current.append(text.substr(i, len));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
        i += len;
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

inline std::vector<std::string> external_tokens(const std::string& text, const std::string& command) {
    char tmpl[] = "/tmp/ewom_segXXXXXX";
    const int fd = ::mkstemp(tmpl);
    if (fd < 0) throw Error("cannot create temporary file for segmenter input");
    const std::string tmp = tmpl;
    {
        std::ofstream f(tmp, std::ios::binary);
        f << text;
    }
    ::close(fd);

    std::string cmd = command;
    if (auto pos = cmd.find("{input}"); pos != std::string::npos)
        cmd.replace(pos, 7, "'" + tmp + "'");
    else
        cmd += " < '" + tmp + "'";

    std::string output;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        std::filesystem::remove(tmp);
        throw SegmenterError("cannot start segmenter '" + command + "'", -1);
    }
    std::array<char, 4096> buf{};
    for (std::size_t n; (n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0;) output.append(buf.data(), n);
    const int raw = ::pclose(pipe);
    std::filesystem::remove(tmp);
    const int status = raw == -1 ? -1 : WIFEXITED(raw) ? WEXITSTATUS(raw) : 128 + WTERMSIG(raw);
    if (status != 0) throw SegmenterError("segmenter '" + command + "' failed", status);

    std::vector<std::string> tokens;
    std::istringstream in(output);
    for (std::string w; in >> w;) tokens.push_back(w);
    return tokens;
}

}  // namespace detail

/// Returns a copy of `doc` with tokens filled in.
inline Document segment(Document doc, const SegmenterSpec& spec) {
    std::vector<std::string> tokens;
    if (!doc.text.empty()) {
        tokens = spec.kind == SegmenterSpec::Kind::whitespace_regex ? detail::regex_tokens(doc.text)
                                                                    : detail::external_tokens(doc.text, spec.command);
    }
    if (spec.self_sufficient_only && !spec.stop_words.empty()) {
        std::erase_if(tokens, [&](const std::string& t) { return spec.stop_words.count(t) > 0; });
    }
    std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
    doc.tokens = std::move(tokens);
    return doc;
}

inline std::vector<Document> segment_all(std::vector<Document> docs, const SegmenterSpec& spec) {
    for (auto& d : docs) d = segment(std::move(d), spec);
    return docs;
}

// ---------------------------------------------------------------------------
// Labels

inline std::map<std::string, std::set<TopicId>> load_labels(const std::filesystem::path& path) {
    std::map<std::string, std::set<TopicId>> labels;
    if (std::filesystem::exists(path) && std::filesystem::file_size(path) == 0) return labels;
    for (const auto& row : csv::read_with_header(path, {"doc_id", "topic_id"}))
        labels[row.fields[0]].insert(row.fields[1]);
    return labels;
}

inline LabeledCorpus attach_labels(std::vector<Document> docs, const std::filesystem::path& label_file,
                                   std::vector<Topic> catalog = default_topic_catalog()) {
    return LabeledCorpus(std::move(docs), load_labels(label_file), std::move(catalog));
}

inline void save_labels(const LabeledCorpus& corpus, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"doc_id", "topic_id"});
    for (const auto& d : corpus.documents())
        for (const auto& t : corpus.labels_of(d.id)) w.row({d.id, t});
}

}  // namespace ewom
