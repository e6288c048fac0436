#include "c2r/c_analyzer.hpp"

#include "c2r/util/text.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <thread>

namespace fs = std::filesystem;

namespace c2r::c {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

bool is_open(const Token& t) { return t.punct("(") || t.punct("[") || t.punct("{"); }
bool is_close(const Token& t) { return t.punct(")") || t.punct("]") || t.punct("}"); }

char closer_for(std::string_view open) {
    if (open == "(") return ')';
    if (open == "[") return ']';
    return '}';
}

// Partner index for every bracket token; npos for everything else.
std::vector<std::size_t> match_brackets(const std::vector<Token>& toks) {
    std::vector<std::size_t> partner(toks.size(), npos);
    std::vector<std::size_t> stack;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        const Token& t = toks[i];
        if (t.kind != TokKind::Punct) continue;
        if (is_open(t)) {
            stack.push_back(i);
        } else if (is_close(t)) {
            if (stack.empty()) throw ParseError("unbalanced '" + std::string(t.text) + "' at byte " + std::to_string(t.span.begin));
            std::size_t o = stack.back();
            if (closer_for(toks[o].text) != t.text[0])
                throw ParseError("mismatched '" + std::string(t.text) + "' at byte " + std::to_string(t.span.begin));
            stack.pop_back();
            partner[o] = i;
            partner[i] = o;
        }
    }
    if (!stack.empty())
        throw ParseError("unclosed '" + std::string(toks[stack.back()].text) + "' at byte " + std::to_string(toks[stack.back()].span.begin));
    return partner;
}

bool is_attribute_word(std::string_view w) {
    return w == "__attribute__" || w == "__attribute" || w == "__asm__" || w == "__asm" || w == "asm" ||
           w == "__declspec";
}

class FileParser {
public:
    FileParser(const std::string& rel, std::string_view text)
        : rel_(rel), text_(text), toks_(lex(text)), partner_(match_brackets(toks_)) {}

    FileModel run() {
        FileModel fm;
        fm.file.path = rel_;
        fm.file.size = text_.size();
        for (const auto& t : toks_) {
            if (t.kind == TokKind::Directive) handle_directive(t, fm);
        }

        std::size_t chunk_begin = npos;
        std::size_t i = 0;
        while (i < toks_.size()) {
            const Token& t = toks_[i];
            if (t.kind == TokKind::Directive) {
                ++i;
                continue;
            }
            if (chunk_begin == npos) chunk_begin = i;
            if (t.punct(";")) {
                classify_declaration(chunk_begin, i, fm);
                chunk_begin = npos;
                ++i;
                continue;
            }
            if (t.punct("{")) {
                std::size_t close = partner_[i];
                std::size_t name_tok = function_name(chunk_begin, i);
                if (name_tok != npos) {
                    emit_function(chunk_begin, name_tok, i, close, fm);
                    chunk_begin = npos;
                }
                i = close + 1;
                continue;
            }
            if (t.punct("(") || t.punct("[")) {
                i = partner_[i] + 1;
                continue;
            }
            ++i;
        }
        // A trailing chunk without ';' is usually a macro invocation; nothing to index.
        return fm;
    }

private:
    // Token indices at bracket depth 0 within [b, e). Openers stand for their whole group.
    std::vector<std::size_t> top_level(std::size_t b, std::size_t e) const {
        std::vector<std::size_t> top;
        for (std::size_t k = b; k < e; ++k) {
            if (toks_[k].kind == TokKind::Directive) continue;
            top.push_back(k);
            if (is_open(toks_[k])) k = partner_[k];
        }
        return top;
    }

    std::string slice(std::size_t begin_byte, std::size_t end_byte) const {
        return std::string(text_.substr(begin_byte, end_byte - begin_byte));
    }

    void handle_directive(const Token& t, FileModel& fm) {
        std::string_view d = t.text.substr(1);
        d = trim(d);
        auto word_end = d.find_first_of(" \t<\"");
        std::string_view word = d.substr(0, word_end);
        std::string_view rest = word_end == std::string_view::npos ? std::string_view{} : trim(d.substr(word_end));
        if (word == "include" && !rest.empty()) {
            char open = rest.front();
            char close = open == '<' ? '>' : (open == '"' ? '"' : 0);
            if (!close) return;
            auto end = rest.find(close, 1);
            if (end == std::string_view::npos) return;
            fm.file.includes.emplace_back(rest.substr(1, end - 1));
        } else if (word == "define" && !rest.empty()) {
            std::size_t n = 0;
            while (n < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[n])) || rest[n] == '_')) ++n;
            if (n == 0) return;
            Definition def;
            def.kind = DefKind::Macro;
            def.name = std::string(rest.substr(0, n));
            def.names = {def.name};
            def.file = rel_;
            def.span = t.span;
            def.text = std::string(t.text);
            fm.definitions.push_back(std::move(def));
        }
    }

    // Index of the function name token when [b, brace) heads a function definition.
    std::size_t function_name(std::size_t b, std::size_t brace) const {
        auto top = top_level(b, brace);
        if (top.size() < 2) return npos;
        for (auto k : top) {
            if (toks_[k].is(TokKind::Keyword, "typedef") || toks_[k].punct("=")) return npos;
        }
        std::size_t pos = top.size();
        // skip trailing __attribute__((...)) groups
        while (pos >= 2 && toks_[top[pos - 1]].punct("(") && toks_[top[pos - 2]].kind == TokKind::Identifier &&
               is_attribute_word(toks_[top[pos - 2]].text)) {
            pos -= 2;
        }
        if (pos < 2) return npos;
        const Token& group = toks_[top[pos - 1]];
        const Token& name = toks_[top[pos - 2]];
        if (!group.punct("(") || name.kind != TokKind::Identifier || is_attribute_word(name.text)) return npos;
        return top[pos - 2];
    }

    void emit_function(std::size_t b, std::size_t name_tok, std::size_t brace, std::size_t close, FileModel& fm) {
        FunctionUnit u;
        u.name = std::string(toks_[name_tok].text);
        u.file = rel_;
        u.span = Span{toks_[b].span.begin, toks_[close].span.end};
        u.body = Span{toks_[brace].span.begin, toks_[close].span.end};
        u.source = slice(u.span.begin, u.span.end);
        u.signature = std::string(trim(text_.substr(u.span.begin, u.body.begin - u.span.begin)));
        for (std::size_t k = b; k < name_tok; ++k) {
            if (toks_[k].is(TokKind::Keyword, "static")) u.is_static = true;
        }
        u.id = rel_ + "::" + u.name;
        int dup = 1;
        for (const auto& other : fm.units) {
            if (other.name == u.name) ++dup;
        }
        if (dup > 1) u.id += "#" + std::to_string(dup);
        fm.units.push_back(std::move(u));
    }

    // Identifier declared by one declarator (tokens given as top-level indices).
    std::optional<std::string> declarator_name(const std::vector<std::size_t>& seg) const {
        std::vector<std::size_t> cut;
        for (auto k : seg) {
            if (toks_[k].punct("=")) break;
            cut.push_back(k);
        }
        // (*name) or (^name) function-pointer style declarators
        for (auto k : cut) {
            if (toks_[k].punct("(") && k + 1 < toks_.size() && (toks_[k + 1].punct("*") || toks_[k + 1].punct("^"))) {
                for (std::size_t j = k + 1; j < partner_[k]; ++j) {
                    if (toks_[j].kind == TokKind::Identifier) return std::string(toks_[j].text);
                }
            }
        }
        for (auto it = cut.rbegin(); it != cut.rend(); ++it) {
            const Token& t = toks_[*it];
            if (t.kind == TokKind::Identifier && !is_attribute_word(t.text)) return std::string(t.text);
        }
        return std::nullopt;
    }

    std::vector<std::string> declarator_names(const std::vector<std::size_t>& top, std::size_t from) const {
        std::vector<std::string> names;
        std::vector<std::size_t> seg;
        auto flush = [&] {
            if (!seg.empty()) {
                if (auto n = declarator_name(seg)) names.push_back(*n);
            }
            seg.clear();
        };
        for (std::size_t p = from; p < top.size(); ++p) {
            if (toks_[top[p]].punct(",")) flush();
            else seg.push_back(top[p]);
        }
        flush();
        return names;
    }

    std::vector<std::string> enumerators(std::size_t open) const {
        std::vector<std::string> out;
        auto inner = top_level(open + 1, partner_[open]);
        bool expect = true;
        for (auto k : inner) {
            const Token& t = toks_[k];
            if (expect && t.kind == TokKind::Identifier) {
                out.emplace_back(t.text);
                expect = false;
            } else if (t.punct(",")) {
                expect = true;
            }
        }
        return out;
    }

    void classify_declaration(std::size_t b, std::size_t semi, FileModel& fm) {
        auto top = top_level(b, semi);
        if (top.empty()) return;
        if (toks_[top[0]].is(TokKind::Keyword, "_Static_assert")) return;

        Span span{toks_[b].span.begin, toks_[semi].span.end};
        std::string text = slice(span.begin, span.end);

        std::size_t typedef_pos = npos;
        bool is_extern = false;
        for (std::size_t p = 0; p < top.size(); ++p) {
            if (toks_[top[p]].is(TokKind::Keyword, "typedef") && typedef_pos == npos) typedef_pos = p;
            if (toks_[top[p]].is(TokKind::Keyword, "extern")) is_extern = true;
        }

        // struct/union/enum with a body
        std::size_t body_pos = npos;
        std::string tag;
        bool is_enum = false;
        for (std::size_t p = 0; p < top.size(); ++p) {
            const Token& t = toks_[top[p]];
            if (t.kind == TokKind::Keyword && (t.text == "struct" || t.text == "union" || t.text == "enum")) {
                std::size_t q = p + 1;
                std::string maybe_tag;
                if (q < top.size() && toks_[top[q]].kind == TokKind::Identifier) maybe_tag = std::string(toks_[top[q]].text), ++q;
                if (q < top.size() && toks_[top[q]].punct("{")) {
                    body_pos = q;
                    tag = maybe_tag;
                    is_enum = t.text == "enum";
                }
                break;
            }
        }

        if (body_pos != npos) {
            Definition rec;
            rec.kind = DefKind::Record;
            rec.file = rel_;
            rec.span = span;
            rec.text = text;
            if (!tag.empty()) rec.tags.push_back(tag);
            if (is_enum) {
                for (auto& e : enumerators(top[body_pos])) rec.names.push_back(std::move(e));
            }
            auto declared = declarator_names(top, body_pos + 1);
            if (typedef_pos != npos) {
                for (auto& d : declared) rec.names.insert(rec.names.begin(), d);
            }
            if (!tag.empty()) rec.name = tag;
            else if (typedef_pos != npos && !declared.empty()) rec.name = declared.front();
            else if (!rec.names.empty()) rec.name = rec.names.front();
            if (!rec.name.empty()) fm.definitions.push_back(rec);

            if (typedef_pos == npos && !declared.empty()) {
                Definition g;
                g.kind = DefKind::Global;
                g.file = rel_;
                g.span = span;
                g.text = text;
                g.name = declared.front();
                g.names = declared;
                g.is_extern = is_extern;
                fm.definitions.push_back(std::move(g));
            }
            return;
        }

        if (typedef_pos != npos) {
            auto declared = declarator_names(top, typedef_pos + 1);
            if (declared.empty()) return;
            Definition rec;
            rec.kind = DefKind::Record;
            rec.file = rel_;
            rec.span = span;
            rec.text = text;
            rec.name = declared.front();
            rec.names = declared;
            fm.definitions.push_back(std::move(rec));
            return;
        }

        // forward declaration: struct foo;
        if (top.size() == 2 && toks_[top[0]].kind == TokKind::Keyword &&
            (toks_[top[0]].text == "struct" || toks_[top[0]].text == "union" || toks_[top[0]].text == "enum")) {
            return;
        }

        // prototype: first top-level '(' follows an identifier and no initializer precedes it
        for (std::size_t p = 1; p < top.size(); ++p) {
            const Token& t = toks_[top[p]];
            if (t.punct("=")) break;
            if (t.punct("(")) {
                const Token& prev = toks_[top[p - 1]];
                if (prev.kind == TokKind::Identifier && !is_attribute_word(prev.text)) {
                    fm.declarations.push_back(Declaration{std::string(prev.text), rel_, text, span});
                    return;
                }
                break;
            }
        }

        auto names = declarator_names(top, 0);
        if (names.empty()) return;
        Definition g;
        g.kind = DefKind::Global;
        g.file = rel_;
        g.span = span;
        g.text = text;
        g.name = names.front();
        g.names = names;
        g.is_extern = is_extern;
        fm.definitions.push_back(std::move(g));
    }

    std::string rel_;
    std::string_view text_;
    std::vector<Token> toks_;
    std::vector<std::size_t> partner_;
};

bool has_extension(const fs::path& p, const std::vector<std::string>& exts) {
    auto ext = p.extension().string();
    return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

} // namespace

FileModel parse_c_source(const std::string& rel_path, std::string_view text) {
    return FileParser(rel_path, text).run();
}

RepoModel::RepoModel(fs::path root, std::vector<FileModel> files, std::vector<SkippedFile> skipped)
    : root_(std::move(root)), skipped_(std::move(skipped)) {
    std::sort(files.begin(), files.end(), [](const FileModel& a, const FileModel& b) { return a.file.path < b.file.path; });
    std::sort(skipped_.begin(), skipped_.end(), [](const SkippedFile& a, const SkippedFile& b) { return a.path < b.path; });
    for (auto& fm : files) {
        files_.push_back(fm.file);
        for (auto& u : fm.units) units_.push_back(std::move(u));
        for (auto& d : fm.declarations) declarations_.push_back(std::move(d));
        for (auto& d : fm.definitions) definitions_.push_back(std::move(d));
    }
    for (std::size_t i = 0; i < units_.size(); ++i) {
        unit_index_.emplace(units_[i].id, i);
        by_name_[units_[i].name].push_back(i);
    }
}

const FunctionUnit* RepoModel::find_unit(std::string_view id) const {
    auto it = unit_index_.find(id);
    return it == unit_index_.end() ? nullptr : &units_[it->second];
}

const SourceFile* RepoModel::find_file(std::string_view path) const {
    for (const auto& f : files_) {
        if (f.path == path) return &f;
    }
    return nullptr;
}

std::vector<std::size_t> RepoModel::units_named(std::string_view name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? std::vector<std::size_t>{} : it->second;
}

bool RepoModel::has_declaration(std::string_view name) const {
    return std::any_of(declarations_.begin(), declarations_.end(), [&](const Declaration& d) { return d.name == name; });
}

bool RepoModel::operator==(const RepoModel& other) const {
    return files_ == other.files_ && units_ == other.units_ && declarations_ == other.declarations_ &&
           definitions_ == other.definitions_ && skipped_ == other.skipped_;
}

RepoModel parse_c_repo(const fs::path& root, const ParseOptions& options) {
    if (!fs::is_directory(root)) throw FatalError("C root does not exist: " + root.string());

    std::vector<fs::path> paths;
    for (auto it = fs::recursive_directory_iterator(root); it != fs::recursive_directory_iterator(); ++it) {
        if (it->is_directory() && it->path().filename().string().starts_with(".")) {
            it.disable_recursion_pending();
            continue;
        }
        if (it->is_regular_file() && has_extension(it->path(), options.extensions)) paths.push_back(it->path());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw FatalError("no C sources under " + root.string());

    std::vector<std::optional<FileModel>> parsed(paths.size());
    std::vector<std::string> errors(paths.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < paths.size(); i = next++) {
            auto rel = fs::relative(paths[i], root).generic_string();
            try {
                parsed[i] = parse_c_source(rel, read_file(paths[i]));
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, paths.size());
    std::vector<std::thread> pool;
    for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::vector<FileModel> files;
    std::vector<SkippedFile> skipped;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        auto rel = fs::relative(paths[i], root).generic_string();
        if (parsed[i]) {
            files.push_back(std::move(*parsed[i]));
        } else {
            spdlog::warn("skipping {}: {}", rel, errors[i]);
            skipped.push_back(SkippedFile{rel, errors[i]});
        }
    }
    if (files.empty()) throw FatalError("no parseable C sources under " + root.string());
    return RepoModel(root, std::move(files), std::move(skipped));
}

} // namespace c2r::c
