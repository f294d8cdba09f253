#pragma once

#include <array>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "biaskit/core/error.hpp"

namespace biaskit {

enum class Venue { NYT, FOX };

enum class Category { Art, Sport, Food, Travel, Opinion, Politics, Science, Technology, US, World };

// Training taxonomy of the face classifier. Order is the fixed label order
// used for argmax tie-breaking.
enum class Race7 { Black, EastAsian, Indian, Latinx, MiddleEastern, SoutheastAsian, White };

// Analysis taxonomy (images and text). East and Southeast Asian collapse to Asian.
enum class Race6 { Asian, Black, Indian, Latinx, MiddleEastern, White };

enum class AgeBracket { A0_9, A10_19, A20_39, A40_59, A60_plus };

enum class Gender { Male, Female };

enum class Emotion { Neutral, Disgust, Fear, Joy, Anger, Sadness, Surprise };

enum class Sentiment { Positive, Negative };

enum class Topic {
  Animals, Agriculture, Celebrations, Disaster, Disease, Economics, Education,
  Entertainment, Environment, Finance, Food, Health, Immigration, Inventions,
  Manufacturing, Movie, Politics, Poverty, Science, Sport, Technology, Terrorism,
  Violence, War, Weather
};

template <typename E>
struct LabelTraits;

template <>
struct LabelTraits<Venue> {
  static constexpr std::string_view kind = "venue";
  static constexpr std::array<std::string_view, 2> names{"NYT", "FOX"};
};

template <>
struct LabelTraits<Category> {
  static constexpr std::string_view kind = "category";
  static constexpr std::array<std::string_view, 10> names{
      "Art", "Sport", "Food", "Travel", "Opinion", "Politics", "Science", "Technology", "US", "World"};
};

template <>
struct LabelTraits<Race7> {
  static constexpr std::string_view kind = "race7";
  static constexpr std::array<std::string_view, 7> names{
      "Black", "East Asian", "Indian", "Latinx", "Middle Eastern", "Southeast Asian", "White"};
};

template <>
struct LabelTraits<Race6> {
  static constexpr std::string_view kind = "race";
  static constexpr std::array<std::string_view, 6> names{
      "Asian", "Black", "Indian", "Latinx", "Middle Eastern", "White"};
};

template <>
struct LabelTraits<AgeBracket> {
  static constexpr std::string_view kind = "age";
  static constexpr std::array<std::string_view, 5> names{"0-9", "10-19", "20-39", "40-59", "60+"};
};

template <>
struct LabelTraits<Gender> {
  static constexpr std::string_view kind = "gender";
  static constexpr std::array<std::string_view, 2> names{"Male", "Female"};
};

template <>
struct LabelTraits<Emotion> {
  static constexpr std::string_view kind = "emotion";
  static constexpr std::array<std::string_view, 7> names{
      "Neutral", "Disgust", "Fear", "Joy", "Anger", "Sadness", "Surprise"};
};

template <>
struct LabelTraits<Sentiment> {
  static constexpr std::string_view kind = "sentiment";
  static constexpr std::array<std::string_view, 2> names{"Positive", "Negative"};
};

template <>
struct LabelTraits<Topic> {
  static constexpr std::string_view kind = "topic";
  static constexpr std::array<std::string_view, 25> names{
      "Animals", "Agriculture", "Celebrations", "Disaster", "Disease", "Economics", "Education",
      "Entertainment", "Environment", "Finance", "Food", "Health", "Immigration", "Inventions",
      "Manufacturing", "Movie", "Politics", "Poverty", "Science", "Sport", "Technology",
      "Terrorism", "Violence", "War", "Weather"};
};

template <typename E>
concept Labeled = requires { LabelTraits<E>::names; };

template <Labeled E>
constexpr std::size_t label_count() {
  return LabelTraits<E>::names.size();
}

template <Labeled E>
constexpr std::size_t index_of(E e) {
  return static_cast<std::size_t>(e);
}

template <Labeled E>
constexpr std::string_view to_string(E e) {
  return LabelTraits<E>::names[index_of(e)];
}

template <Labeled E>
constexpr auto all_labels() {
  std::array<E, label_count<E>()> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<E>(i);
  return out;
}

// Lowercased with spaces, underscores, hyphens and dots removed; used for
// tolerant matching of human- and model-produced label strings.
inline std::string fold_label(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == ' ' || c == '_' || c == '-' || c == '.' || c == '\t') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

template <Labeled E>
std::optional<E> parse_label(std::string_view s) {
  const std::string key = fold_label(s);
  if (key.empty()) return std::nullopt;
  const auto& names = LabelTraits<E>::names;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (fold_label(names[i]) == key) return static_cast<E>(i);
  }
  return std::nullopt;
}

template <Labeled E>
E label_from_string(std::string_view s) {
  if (auto v = parse_label<E>(s)) return *v;
  throw InvalidInput("unknown " + std::string(LabelTraits<E>::kind) + " label '" + std::string(s) + "'");
}

// Lowercase venue key used in paths and on the command line.
inline std::string venue_key(Venue v) { return v == Venue::NYT ? "nyt" : "fox"; }

inline constexpr std::array<double, 5> kAgeMidpoints{4.5, 14.5, 29.5, 49.5, 70.0};

constexpr double age_midpoint(AgeBracket b) { return kAgeMidpoints[index_of(b)]; }

}  // namespace biaskit
