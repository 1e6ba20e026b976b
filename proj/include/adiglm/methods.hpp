#pragma once

// The catalog of concrete ADI-DIMSIM coefficient sets (orders 2..4) plus the
// illustrative 4-stage second-order tableau used by the permutation tests.
// Order 2 is closed form in sqrt(2); orders 3 and 4 are stored as integer
// numerator/denominator pairs and divided once at load. Construction is
// templated on the real type so diagnostics can rebuild the tableaux in
// extended precision.

#include <array>
#include <cstdint>

#include "adiglm/tableau.hpp"

namespace adiglm {

enum class MethodId { AdiDimsim2, AdiDimsim3, AdiDimsim4, RemarkDimsim2 };

namespace detail {

#if defined(__SIZEOF_INT128__)
using wide_int = __int128;
#else
using wide_int = long long;
#endif
#if defined(__SIZEOF_FLOAT128__)
using wide_float = __float128;
#else
using wide_float = long double;
#endif

// Some order-4 numerators run to 25 digits, past the int64 range.
inline wide_int parse_wide(const char* s) {
  bool negative = false;
  if (*s == '-') {
    negative = true;
    ++s;
  }
  wide_int value = 0;
  for (; *s; ++s) value = value * 10 + (*s - '0');
  return negative ? -value : value;
}

struct Rat {
  const char* num;
  const char* den;
};

template <class R>
R rational(const Rat& r) {
  return static_cast<R>(static_cast<wide_float>(parse_wide(r.num)) /
                        static_cast<wide_float>(parse_wide(r.den)));
}

template <class R, std::size_t N>
Matrix<R> rational_matrix(std::size_t rows, std::size_t cols, const std::array<Rat, N>& entries) {
  Matrix<R> m(rows, cols);
  std::size_t k = 0;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rational<R>(entries[k++]);
  return m;
}

} // namespace detail

template <class R>
struct MethodCoefficients {
  Matrix<R> AI, BI, WI, AE, BE, WE;
  std::vector<R> v, c;
  R gamma{};
  int order = 0;
};

namespace detail {

template <class R>
MethodCoefficients<R> coefficients_order2() {
  const R s2 = real_sqrt(R(2));
  MethodCoefficients<R> m;
  m.order = 2;
  m.gamma = (R(2) - s2) / R(2);
  m.AI = Matrix<R>(2, 2, {m.gamma, R(0), R(2) * (s2 + R(3)) / R(7), m.gamma});
  m.BI = Matrix<R>(2, 2,
                   {(R(73) - R(34) * s2) / R(28), (R(4) * s2 - R(5)) / R(4),
                    R(3) * (R(29) - R(16) * s2) / R(28), (R(34) * s2 - R(45)) / R(28)});
  m.WI = Matrix<R>(2, 3,
                   {R(1), (s2 - R(2)) / R(2), R(0), R(1), R(3) * (s2 - R(4)) / R(14),
                    (s2 - R(1)) / R(2)});
  m.AE = Matrix<R>(2, 2, {R(0), R(0), R(3) / R(2), R(0)});
  m.BE = Matrix<R>(2, 2,
                   {R(1) / s2, (R(3) - s2) / R(4), (s2 - R(1)) / R(2), (R(3) - s2) / R(4)});
  m.WE = Matrix<R>(2, 3, {R(1), R(0), R(0), R(1), R(-1) / R(2), R(1) / R(2)});
  m.v = {(R(3) - s2) / R(2), (s2 - R(1)) / R(2)};
  m.c = {R(0), R(1)};
  return m;
}

template <class R>
MethodCoefficients<R> coefficients_order3() {
  static constexpr Rat g{"129981159316", "298213221025"};
  static constexpr std::array<Rat, 9> ai{{{"129981159316", "298213221025"},
                                          {"0", "1"},
                                          {"0", "1"},
                                          {"472981046840", "1888035733227"},
                                          {"129981159316", "298213221025"},
                                          {"0", "1"},
                                          {"-408860438935", "337456558734"},
                                          {"1049716501919", "1048380236594"},
                                          {"129981159316", "298213221025"}}};
  static constexpr std::array<Rat, 9> bi{{{"818629988268", "981817092145"},
                                          {"735879558291", "1139134361459"},
                                          {"-96693387431", "306159262034"},
                                          {"435713380671", "718693545019"},
                                          {"3397277300866", "2639826970205"},
                                          {"-581689679739", "1212506039656"},
                                          {"-164008995335", "531777165056"},
                                          {"3204278525979", "842472621931"},
                                          {"-1170634530631", "1044535547981"}}};
  static constexpr std::array<Rat, 12> wi{{{"1", "1"},
                                           {"-129981159316", "298213221025"},
                                           {"0", "1"},
                                           {"0", "1"},
                                           {"1", "1"},
                                           {"-63231801579", "339260252164"},
                                           {"-94226735668", "1013918320559"},
                                           {"-50172116077", "1490999795865"},
                                           {"1", "1"},
                                           {"1224205243956", "1580735023225"},
                                           {"-377260820095", "864278390147"},
                                           {"-145496067686", "824686465859"}}};
  static constexpr std::array<Rat, 9> ae{{{"0", "1"},
                                          {"0", "1"},
                                          {"0", "1"},
                                          {"692830401049", "1119419041371"},
                                          {"0", "1"},
                                          {"0", "1"},
                                          {"-974910195245", "1036334372568"},
                                          {"1458124485343", "1218848111125"},
                                          {"0", "1"}}};
  static constexpr std::array<Rat, 9> be{{{"274198327012", "348784765929"},
                                          {"335124252337", "1242427076379"},
                                          {"256046237035", "1044616400532"},
                                          {"2367946890051", "2381074405894"},
                                          {"-395462379375", "996294720374"},
                                          {"391448928279", "669688356392"},
                                          {"1211513153203", "1601457627995"},
                                          {"473388990672", "901108379101"},
                                          {"1335987676745", "1749669440649"}}};
  static constexpr std::array<Rat, 12> we{{{"1", "1"},
                                           {"0", "1"},
                                           {"0", "1"},
                                           {"0", "1"},
                                           {"1", "1"},
                                           {"-105007291910", "883010702197"},
                                           {"1", "8"},
                                           {"1", "48"},
                                           {"1", "1"},
                                           {"6500435948486", "8732264247243"},
                                           {"-119638187109", "1218848111125"},
                                           {"25266119777", "1475180609484"}}};
  static constexpr std::array<Rat, 3> vv{{{"1611220452657", "2918396719813"},
                                          {"626900045900", "853091602939"},
                                          {"-165394139815", "576391394057"}}};
  MethodCoefficients<R> m;
  m.order = 3;
  m.gamma = rational<R>(g);
  m.AI = rational_matrix<R>(3, 3, ai);
  m.BI = rational_matrix<R>(3, 3, bi);
  m.WI = rational_matrix<R>(3, 4, wi);
  m.AE = rational_matrix<R>(3, 3, ae);
  m.BE = rational_matrix<R>(3, 3, be);
  m.WE = rational_matrix<R>(3, 4, we);
  m.v = {rational<R>(vv[0]), rational<R>(vv[1]), rational<R>(vv[2])};
  m.c = {R(0), R(1) / R(2), R(1)};
  return m;
}

template <class R>
MethodCoefficients<R> coefficients_order4() {
  static constexpr std::array<Rat, 16> ai{{{"2", "5"}, {"0", "1"}, {"0", "1"}, {"0", "1"},
                                           {"1", "155"}, {"2", "5"}, {"0", "1"}, {"0", "1"},
                                           {"-3", "127"}, {"31", "72"}, {"2", "5"}, {"0", "1"},
                                           {"6", "139"}, {"12", "19"}, {"29", "95"}, {"2", "5"}}};
  static constexpr std::array<Rat, 16> bi{{{"25640275033859", "233564187988800"},
                                           {"405169687", "540615360"},
                                           {"1089772729", "8109230400"},
                                           {"70445177", "426801600"},
                                           {"89870426730779", "233564187988800"},
                                           {"-545995987", "1621846080"},
                                           {"13906861889", "8109230400"},
                                           {"-1223893451", "4410283200"},
                                           {"292292722987739", "233564187988800"},
                                           {"-5722388059", "1621846080"},
                                           {"5251926081", "901025600"},
                                           {"-115646334041", "54203803200"},
                                           {"12591629268162881", "4437719571787200"},
                                           {"-4936252337", "540615360"},
                                           {"102615203329", "8109230400"},
                                           {"-5841129112303", "1127183025600"}}};
  static constexpr std::array<Rat, 20> wi{{{"1", "1"}, {"-2", "5"}, {"0", "1"}, {"0", "1"}, {"0", "1"},
                                           {"1", "1"}, {"-34", "465"}, {"-7", "90"}, {"-13", "810"},
                                           {"-19", "9720"},
                                           {"1", "1"}, {"-6413", "45720"}, {"-203", "1080"},
                                           {"-137", "2160"}, {"-827", "58320"},
                                           {"1", "1"}, {"-5018", "13205"}, {"-179", "570"},
                                           {"-233", "1710"}, {"-2707", "61560"}}};
  static constexpr std::array<Rat, 16> ae{{{"0", "1"}, {"0", "1"}, {"0", "1"}, {"0", "1"},
                                           {"768", "7129"}, {"0", "1"}, {"0", "1"}, {"0", "1"},
                                           {"2699", "8714"}, {"4969", "11444"}, {"0", "1"}, {"0", "1"},
                                           {"2629", "3049"}, {"2643", "20780"}, {"11707", "22938"},
                                           {"0", "1"}}};
  static constexpr std::array<Rat, 16> be{{{"9887514441977875393", "8084061960608111040"},
                                           {"75125403707867", "1268701473326400"},
                                           {"200041286909", "326332503360"},
                                           {"-5924747", "85360320"},
                                           {"8877006696901861513", "8084061960608111040"},
                                           {"727096994167267", "1268701473326400"},
                                           {"-67370070011", "326332503360"},
                                           {"119019300359", "202844573760"},
                                           {"17771936994130966829533", "23128501269299805685440"},
                                           {"249067742877763", "140966830369600"},
                                           {"-519937182674317", "311212430704320"},
                                           {"940676971064501", "1064048569640640"},
                                           {"8566493244911672759404729", "32110678261545596037650880"},
                                           {"17071987325364576461", "4850245732526827200"},
                                           {"-257098496412689", "67811894198208"},
                                           {"275159340062707361", "206758465410336192"}}};
  static constexpr std::array<Rat, 20> we{{{"1", "1"}, {"0", "1"}, {"0", "1"}, {"0", "1"}, {"0", "1"},
                                           {"1", "1"}, {"4825", "21387"}, {"1", "18"}, {"1", "162"},
                                           {"1", "1944"},
                                           {"1", "1"}, {"-11557817", "149584524"}, {"7981", "102996"},
                                           {"46831", "1853928"}, {"30869", "5561784"},
                                           {"1", "1"}, {"-363193513153", "726655425180"},
                                           {"83904703", "714977460"}, {"198121973", "4289864760"},
                                           {"302650439", "19304391420"}}};
  static constexpr std::array<Rat, 4> vv{{{"3", "40"},
                                          {"-77", "277"},
                                          {"-41", "107"},
                                          {"1880483", "1185560"}}};
  MethodCoefficients<R> m;
  m.order = 4;
  m.gamma = rational<R>({"2", "5"});
  m.AI = rational_matrix<R>(4, 4, ai);
  m.BI = rational_matrix<R>(4, 4, bi);
  m.WI = rational_matrix<R>(4, 5, wi);
  m.AE = rational_matrix<R>(4, 4, ae);
  m.BE = rational_matrix<R>(4, 4, be);
  m.WE = rational_matrix<R>(4, 5, we);
  m.v = {rational<R>(vv[0]), rational<R>(vv[1]), rational<R>(vv[2]), rational<R>(vv[3])};
  m.c = {R(0), R(1) / R(3), R(2) / R(3), R(1)};
  return m;
}

} // namespace detail

template <class R>
MethodCoefficients<R> method_coefficients(int order) {
  switch (order) {
    case 2: return detail::coefficients_order2<R>();
    case 3: return detail::coefficients_order3<R>();
    case 4: return detail::coefficients_order4<R>();
    default: detail::fail("method_coefficients: no catalog entry of order ", order);
  }
}

template <class R>
Matrix<R> rank_one_rows(const std::vector<R>& v) {
  Matrix<R> m(v.size(), v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) m(i, j) = v[j];
  return m;
}

inline AdiMethod get_method(MethodId id) {
  int order = 0;
  std::string name;
  switch (id) {
    case MethodId::AdiDimsim2: order = 2; name = "adi-dimsim2"; break;
    case MethodId::AdiDimsim3: order = 3; name = "adi-dimsim3"; break;
    case MethodId::AdiDimsim4: order = 4; name = "adi-dimsim4"; break;
    case MethodId::RemarkDimsim2:
      detail::fail("get_method: the remark tableau is assembled form only; "
                   "use get_remark_tableau()");
  }
  MethodCoefficients<double> co = method_coefficients<double>(order);
  AdiMethod m;
  m.name = name;
  m.order = order;
  m.gamma = co.gamma;
  const std::size_t s = co.c.size();
  RealMatrix u = RealMatrix::identity(s);
  RealMatrix v = rank_one_rows(co.v);
  std::vector<double> c(co.c.begin(), co.c.end());
  m.implicit_base = BaseTableau{co.AI, u, co.BI, v, co.WI, c, order, order};
  m.explicit_base = BaseTableau{co.AE, u, co.BE, v, co.WE, c, order, order};
  validate_adi_method(m);
  const double tol = order == 4 ? 1e-10 : 1e-12;
  for (const BaseTableau* base : {&m.implicit_base, &m.explicit_base}) {
    auto pre = preconsistency_residual(*base);
    if (pre.first > 1e-12 || pre.second > 1e-12)
      detail::fail(name, ": preconsistency residual (", pre.first, ", ", pre.second, ")");
    auto report = check_order_conditions(*base);
    if (report.max_residual() > tol)
      detail::fail(name, ": order-condition residual ", report.max_residual(), " exceeds ", tol);
  }
  return m;
}

inline AdiMethod method_for_order(int order) {
  switch (order) {
    case 2: return get_method(MethodId::AdiDimsim2);
    case 3: return get_method(MethodId::AdiDimsim3);
    case 4: return get_method(MethodId::AdiDimsim4);
    default: detail::fail("no cataloged method of order ", order, " (choose 2, 3, or 4)");
  }
}

// The 4-stage second-order tableau from the stage-ordering remark. Its
// diagonal (5/8) differs from adi-dimsim2's gamma, so it is a separate
// catalog entry used by assembly and permutation tests only. All entries are
// dyadic rationals, hence exact in double precision.
inline AssembledTableau get_remark_tableau() {
  AssembledTableau t;
  t.layout = PartitionLayout{2, 2};
  t.base_internal_stages = 2;
  t.base_external_stages = 2;
  t.c = {0, 1, 0, 1};
  t.A = RealMatrix(4, 4,
                   {5.0 / 8, 0, 0, 0,
                    1.0 / 4, 5.0 / 8, 1.0 / 2, 0,
                    5.0 / 8, 0, 5.0 / 8, 0,
                    1.0 / 4, 5.0 / 8, 1.0 / 4, 5.0 / 8});
  t.U = RealMatrix::identity(4);
  t.B = RealMatrix(4, 4,
                   {1.0 / 2, -5.0 / 32, -3.0 / 128, 5.0 / 128,
                    0, 27.0 / 32, 13.0 / 128, 85.0 / 128,
                    -3.0 / 128, 5.0 / 128, -3.0 / 128, 5.0 / 128,
                    13.0 / 128, 85.0 / 128, 13.0 / 128, 85.0 / 128});
  t.V = RealMatrix(4, 4,
                   {-5.0 / 16, 21.0 / 16, 0, 0,
                    -5.0 / 16, 21.0 / 16, 0, 0,
                    0, 0, -5.0 / 16, 21.0 / 16,
                    0, 0, -5.0 / 16, 21.0 / 16});
  return t;
}

} // namespace adiglm
