#include "delayminer/time.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

#include "delayminer/error.hpp"

namespace delayminer {
namespace {

constexpr Timestamp floor_div(Timestamp a, Timestamp b) {
  Timestamp q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }
  void skip() { ++pos_; }

  bool take(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  // Reads exactly `width` digits.
  bool digits(int width, int& out) {
    out = 0;
    for (int i = 0; i < width; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(peek()))) return false;
      out = out * 10 + (peek() - '0');
      ++pos_;
    }
    return true;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

[[noreturn]] void bad_timestamp(std::string_view text) {
  throw ArgumentError("unparseable timestamp '" + std::string(text) + "'");
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);

  Cursor in(text);
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!in.digits(4, year) || !in.take('-') || !in.digits(2, month) || !in.take('-') ||
      !in.digits(2, day)) {
    bad_timestamp(text);
  }
  if (!in.done()) {
    if (!in.take('T') && !in.take(' ')) bad_timestamp(text);
    if (!in.digits(2, hour) || !in.take(':') || !in.digits(2, minute)) bad_timestamp(text);
    if (in.take(':') && !in.digits(2, second)) bad_timestamp(text);
    if (in.take('.') || in.take(',')) {
      if (!std::isdigit(static_cast<unsigned char>(in.peek()))) bad_timestamp(text);
      while (std::isdigit(static_cast<unsigned char>(in.peek()))) in.skip();
    }
  }

  Seconds offset = 0;
  if (!in.done()) {
    if (in.take('Z') || in.take('z')) {
    } else if (in.peek() == '+' || in.peek() == '-') {
      const int sign = in.peek() == '-' ? -1 : 1;
      in.skip();
      int off_h = 0, off_m = 0;
      if (!in.digits(2, off_h)) bad_timestamp(text);
      in.take(':');
      if (!in.done() && !in.digits(2, off_m)) bad_timestamp(text);
      offset = sign * (off_h * 3600 + off_m * 60);
    } else {
      bad_timestamp(text);
    }
  }
  if (!in.done()) bad_timestamp(text);

  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second > 60) bad_timestamp(text);
  const Timestamp days = sys_days{ymd}.time_since_epoch().count();
  return days * kSecondsPerDay + hour * 3600 + minute * 60 + second - offset;
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const Timestamp days = floor_div(t, kSecondsPerDay);
  const Seconds in_day = t - days * kSecondsPerDay;
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02u:%02u:%02uZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<unsigned>(in_day / 3600) % 24u, static_cast<unsigned>(in_day / 60 % 60) % 60u,
                static_cast<unsigned>(in_day % 60) % 60u);
  return buf;
}

int weekday_index(Timestamp t) {
  // 1970-01-01 was a Thursday (index 3).
  const Timestamp days = floor_div(t, kSecondsPerDay);
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

Timestamp floor_to_day(Timestamp t) { return floor_div(t, kSecondsPerDay) * kSecondsPerDay; }

Timestamp floor_to_week(Timestamp t) {
  return floor_to_day(t) - static_cast<Timestamp>(weekday_index(t)) * kSecondsPerDay;
}

}  // namespace delayminer
