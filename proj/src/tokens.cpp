#include "c2r/tokens.hpp"

#include <cctype>

namespace c2r {

std::size_t estimate_tokens(std::string_view text) {
    enum class Run { None, Word, Punct };
    Run run = Run::None;
    std::size_t count = 0;
    for (char ch : text) {
        auto c = static_cast<unsigned char>(ch);
        Run next = std::isspace(c) ? Run::None : (std::isalnum(c) || c == '_' || c >= 0x80) ? Run::Word : Run::Punct;
        if (next != Run::None && next != run) ++count;
        run = next;
    }
    return count;
}

} // namespace c2r
