#ifndef PATHOPT_LP_FORMAT_H
#define PATHOPT_LP_FORMAT_H

#include <string>

#include "pathopt/model.h"

namespace pathopt {
namespace lp {

// CPLEX-style LP text: Minimize/Maximize, Subject To, Bounds, Binary, End.
// Variables appear in table order and numbers use 17 significant digits,
// so equal models give byte-identical output.
std::string ExportLpText(const ProgramModel& model);

}  // namespace lp
}  // namespace pathopt

#endif
