#include "memoforge/lang.hpp"

#include <algorithm>
#include <map>

namespace memoforge::lang {

const std::string& Alphabet::name(Symbol s) const {
    if (s < 1 || s > size()) throw make_error("BadSymbolIndex", "symbol index " + std::to_string(s));
    return symbols[static_cast<size_t>(s - 1)];
}

Symbol Alphabet::index_of(const std::string& nm) const {
    for (int i = 0; i < size(); ++i)
        if (symbols[static_cast<size_t>(i)] == nm) return i + 1;
    throw make_error("BadSymbolIndex", "unknown symbol '" + nm + "'");
}

Alphabet Alphabet::generic(int T) {
    Alphabet a;
    for (int i = 0; i < T; ++i) {
        if (T <= 26) a.symbols.push_back(std::string(1, static_cast<char>('a' + i)));
        else a.symbols.push_back("s" + std::to_string(i + 1));
    }
    return a;
}

int Language::max_len() const {
    size_t m = 0;
    for (const auto& s : samples) m = std::max(m, s.x.size());
    return static_cast<int>(m);
}

std::set<Symbol> typ(const Sentence& x) {
    return std::set<Symbol>(x.begin(), x.end());
}

std::string sentence_to_string(const Alphabet& a, const Sentence& x, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < x.size(); ++i) {
        if (i) out += sep;
        out += a.name(x[i]);
    }
    return out;
}

bool sentence_less(const Sentence& a, const Sentence& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

Language validate_language(const Alphabet& alphabet, std::vector<Sample> samples,
                           bool allow_stop_labels) {
    if (alphabet.size() < 1) throw make_error("EmptyAlphabet", "alphabet needs at least one symbol");
    {
        std::set<std::string> uniq(alphabet.symbols.begin(), alphabet.symbols.end());
        if (static_cast<int>(uniq.size()) != alphabet.size())
            throw make_error("DuplicateSymbol", "alphabet symbols must be distinct");
    }
    if (samples.empty()) throw make_error("EmptyLanguage", "no samples");

    const int T = alphabet.size();
    std::map<Sentence, Symbol> seen;
    for (const auto& s : samples) {
        if (s.x.empty()) throw make_error("EmptySentence", "zero-length sentence");
        for (Symbol t : s.x)
            if (t < 1 || t > T)
                throw make_error("BadSymbolIndex", "token index " + std::to_string(t));
        bool label_ok = (s.y >= 1 && s.y <= T) || (allow_stop_labels && s.y == kStop);
        if (!label_ok) throw make_error("BadSymbolIndex", "label index " + std::to_string(s.y));
        auto it = seen.find(s.x);
        if (it != seen.end()) {
            if (it->second != s.y)
                throw make_error("InconsistentLabel",
                                 "sentence has labels " + std::to_string(it->second) + " and " +
                                     std::to_string(s.y));
            throw make_error("DuplicateSample", "repeated (x, y) pair");
        }
        seen.emplace(s.x, s.y);
    }
    Language L;
    L.alphabet = alphabet;
    L.samples = std::move(samples);
    return L;
}

Symbol lcp_label(int len, int T) {
    return ((len - 1) % T) + 1;
}

Language gen_lcp(const Alphabet& alphabet, int n, LcpVariant variant, std::uint64_t sample_budget) {
    if (n < 1) throw make_error("Range", "n must be >= 1");
    const int T = alphabet.size();
    std::uint64_t total = 0, pow = 1;
    for (int k = 1; k <= n; ++k) {
        pow *= static_cast<std::uint64_t>(T);
        total += pow;
        if (total > sample_budget)
            throw make_error("Budget", "T^1+..+T^n exceeds sample budget " + std::to_string(sample_budget));
    }

    std::vector<Sample> samples;
    Sentence cur;
    // enumerate by length, lexicographic within a length
    for (int k = 1; k <= n; ++k) {
        cur.assign(static_cast<size_t>(k), 1);
        while (true) {
            size_t distinct = typ(cur).size();
            bool keep = variant == LcpVariant::All || (variant == LcpVariant::Eq1 && distinct == 1) ||
                        (variant == LcpVariant::Gt1 && distinct > 1);
            if (keep) samples.push_back({cur, lcp_label(k, T)});
            int i = k - 1;
            while (i >= 0 && cur[static_cast<size_t>(i)] == T) { cur[static_cast<size_t>(i)] = 1; --i; }
            if (i < 0) break;
            ++cur[static_cast<size_t>(i)];
        }
    }
    if (samples.empty()) throw make_error("EmptyLanguage", "variant filter left no samples");
    return validate_language(alphabet, std::move(samples));
}

Language gen_family_S(int i) {
    if (i < 2) throw make_error("Range", "family index must be >= 2");
    Alphabet a = Alphabet::generic(2);
    Sentence x1(static_cast<size_t>(i + 1), 1);
    x1[static_cast<size_t>(i - 1)] = 2; // position i
    Sentence x2(static_cast<size_t>(i), 1);
    std::vector<Sample> s{{x1, lcp_label(i + 1, 2)}, {x2, lcp_label(i, 2)}};
    return validate_language(a, std::move(s));
}

Language gen_family_Sprime(int i) {
    if (i < 2) throw make_error("Range", "family index must be >= 2");
    Alphabet a = Alphabet::generic(4);
    const int T = 4;
    std::vector<Sample> s;
    Sentence base(static_cast<size_t>(i), 1);
    auto push = [&](Sentence x) {
        int len = static_cast<int>(x.size());
        s.push_back({std::move(x), lcp_label(len, T)});
    };
    push(base);
    for (Symbol last = 1; last <= 3; ++last) { // length i+1
        Sentence x = base;
        x.push_back(last);
        push(std::move(x));
    }
    for (Symbol last = 1; last <= 3; ++last) { // length i+2, gamma4 then last
        Sentence x = base;
        x.push_back(4);
        x.push_back(last);
        push(std::move(x));
    }
    for (Symbol last : {1, 2, 4}) { // length i+3, gamma4, gamma1, then last
        Sentence x = base;
        x.push_back(4);
        x.push_back(1);
        x.push_back(last);
        push(std::move(x));
    }
    return validate_language(a, std::move(s));
}

} // namespace memoforge::lang
