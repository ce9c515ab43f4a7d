#include <cctype>
#include <limits>

#include "codm/encounter.hpp"
#include "codm/errors.hpp"

namespace codm {

DiceExpr DiceExpr::constant(int value) {
    if (value < 0 || value > kMaxDiceConstant) {
        throw ValidationError("constant quantity out of range: " + std::to_string(value));
    }
    return DiceExpr(0, 0, value);
}

DiceExpr DiceExpr::dice(int count, int sides, int modifier) {
    if (count < 1 || count > kMaxDiceCount || sides < 1 || sides > kMaxDiceSides) {
        throw ValidationError("dice count/sides out of range");
    }
    if (modifier < -kMaxDiceConstant || modifier > kMaxDiceConstant) {
        throw ValidationError("dice modifier out of range");
    }
    if (count + modifier < 0) {
        throw ValidationError("dice expression can produce a negative quantity");
    }
    return DiceExpr(count, sides, modifier);
}

int DiceExpr::min_value() const noexcept {
    return is_constant() ? modifier_ : count_ + modifier_;
}

int DiceExpr::max_value() const noexcept {
    return is_constant() ? modifier_ : count_ * sides_ + modifier_;
}

namespace {

class DiceLexer {
public:
    explicit DiceLexer(std::string_view text) : text_(text) {}

    void skip_spaces() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }

    bool at_end() const { return pos_ >= text_.size(); }
    std::size_t pos() const { return pos_; }
    char peek() const { return at_end() ? '\0' : text_[pos_]; }
    void advance() { ++pos_; }

    // Reads one unsigned decimal number no larger than `limit`.
    int number(int limit, const char* what) {
        const std::size_t start = pos_;
        long long value = 0;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
            value = value * 10 + (peek() - '0');
            if (value > limit) {
                throw ParseError(start, std::string(what) + " must be at most " + std::to_string(limit));
            }
            advance();
        }
        if (pos_ == start) {
            throw ParseError(start, std::string("expected ") + what);
        }
        return static_cast<int>(value);
    }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
};

}  // namespace

DiceExpr parse_dice(std::string_view text) {
    DiceLexer lex(text);
    lex.skip_spaces();
    if (lex.at_end()) {
        throw ParseError(lex.pos(), "expected a number or dice expression");
    }
    const std::size_t expr_start = lex.pos();
    const int first = lex.number(kMaxDiceConstant, "a digit");

    if (lex.peek() != 'd' && lex.peek() != 'D') {
        lex.skip_spaces();
        if (!lex.at_end()) {
            throw ParseError(lex.pos(), "expected 'd' or end of input");
        }
        return DiceExpr::constant(first);
    }
    if (first < 1 || first > kMaxDiceCount) {
        throw ParseError(expr_start, "dice count must be between 1 and " + std::to_string(kMaxDiceCount));
    }
    lex.advance();  // 'd'
    const std::size_t sides_at = lex.pos();
    const int sides = lex.number(kMaxDiceSides, "number of sides");
    if (sides < 1) {
        throw ParseError(sides_at, "number of sides must be at least 1");
    }

    int modifier = 0;
    lex.skip_spaces();
    if (lex.peek() == '+' || lex.peek() == '-') {
        const bool negative = lex.peek() == '-';
        lex.advance();
        lex.skip_spaces();
        const int k = lex.number(kMaxDiceConstant, "modifier digits");
        modifier = negative ? -k : k;
        lex.skip_spaces();
    }
    if (!lex.at_end()) {
        throw ParseError(lex.pos(), "expected '+', '-' or end of input");
    }
    if (first + modifier < 0) {
        throw ParseError(expr_start, "minimum value " + std::to_string(first + modifier) +
                                         " is negative; quantities cannot be negative");
    }
    return DiceExpr::dice(first, sides, modifier);
}

std::string render_dice(const DiceExpr& e) {
    if (e.is_constant()) {
        return std::to_string(e.modifier());
    }
    std::string out = std::to_string(e.count()) + "d" + std::to_string(e.sides());
    if (e.modifier() > 0) {
        out += "+" + std::to_string(e.modifier());
    } else if (e.modifier() < 0) {
        out += std::to_string(e.modifier());
    }
    return out;
}

int roll_dice(const DiceExpr& e, Rng& rng) {
    if (e.is_constant()) {
        return e.modifier();
    }
    int total = e.modifier();
    for (int i = 0; i < e.count(); ++i) {
        total += static_cast<int>(rng.uniform(1, e.sides()));
    }
    return total;
}

}  // namespace codm
