#pragma once

#include <httplib.h>

// <resolv.h> defines _res as a macro; Eigen uses it as a parameter name.
#undef _res
