#include "fixtime/time.hpp"

#include <fmt/format.h>

#include <cctype>

namespace fixtime {

namespace {

class Cursor {
  public:
    explicit Cursor(std::string_view s) : s_(s) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }

    bool consume(char c) {
        if (peek() == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    /// Reads exactly `width` digits.
    std::optional<int> digits(std::size_t width) {
        if (pos_ + width > s_.size()) {
            return std::nullopt;
        }
        int v = 0;
        for (std::size_t i = 0; i < width; ++i) {
            const char c = s_[pos_ + i];
            if (!std::isdigit(static_cast<unsigned char>(c))) {
                return std::nullopt;
            }
            v = v * 10 + (c - '0');
        }
        pos_ += width;
        return v;
    }

    /// Fractional seconds digits; returns milliseconds (truncated).
    int fraction() {
        int ms = 0;
        int scale = 100;
        while (std::isdigit(static_cast<unsigned char>(peek()))) {
            ms += (peek() - '0') * scale;
            scale /= 10;
            ++pos_;
        }
        return ms;
    }

  private:
    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
    using namespace std::chrono;
    Cursor c(text);
    const auto y = c.digits(4);
    if (!y || !c.consume('-')) {
        return std::nullopt;
    }
    const auto mo = c.digits(2);
    if (!mo || !c.consume('-')) {
        return std::nullopt;
    }
    const auto d = c.digits(2);
    if (!d) {
        return std::nullopt;
    }
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)}, day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    int hh = 0;
    int mm = 0;
    int ss = 0;
    int ms = 0;
    int offset_minutes = 0;
    if (!c.done()) {
        if (!c.consume('T') && !c.consume(' ')) {
            return std::nullopt;
        }
        const auto h = c.digits(2);
        if (!h || !c.consume(':')) {
            return std::nullopt;
        }
        const auto m = c.digits(2);
        if (!m) {
            return std::nullopt;
        }
        hh = *h;
        mm = *m;
        if (c.consume(':')) {
            const auto s = c.digits(2);
            if (!s) {
                return std::nullopt;
            }
            ss = *s;
            if (c.consume('.') || c.consume(',')) {
                ms = c.fraction();
            }
        }
        if (hh > 23 || mm > 59 || ss > 60) {
            return std::nullopt;
        }
        if (c.consume('Z') || c.consume('z')) {
            // UTC
        } else if (c.peek() == '+' || c.peek() == '-') {
            const int sign = c.peek() == '-' ? -1 : 1;
            c.consume(c.peek());
            const auto oh = c.digits(2);
            if (!oh) {
                return std::nullopt;
            }
            c.consume(':');
            const auto om = c.digits(2);
            if (!om) {
                return std::nullopt;
            }
            offset_minutes = sign * (*oh * 60 + *om);
        }
        if (!c.done()) {
            return std::nullopt;
        }
    }
    const sys_days days{ymd};
    const auto local = days + hours{hh} + minutes{mm} + seconds{ss} + milliseconds{ms};
    return Timestamp{local - minutes{offset_minutes}};
}

std::string format_timestamp(Timestamp t) {
    using namespace std::chrono;
    const auto days = floor<std::chrono::days>(t);
    const year_month_day ymd{days};
    auto rest = t - days;
    const auto h = duration_cast<hours>(rest);
    rest -= h;
    const auto m = duration_cast<minutes>(rest);
    rest -= m;
    const auto s = duration_cast<seconds>(rest);
    rest -= s;
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}.{:03d}Z", static_cast<int>(ymd.year()),
                       static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), h.count(), m.count(),
                       s.count(), rest.count());
}

}  // namespace fixtime
