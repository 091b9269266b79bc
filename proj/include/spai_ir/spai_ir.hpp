#pragma once

#include "spai_ir/error.hpp"
#include "spai_ir/precision.hpp"
#include "spai_ir/double_double.hpp"
#include "spai_ir/dense.hpp"
#include "spai_ir/sparse.hpp"
#include "spai_ir/matrix_market.hpp"
#include "spai_ir/spai.hpp"
#include "spai_ir/krylov.hpp"
#include "spai_ir/lu.hpp"
#include "spai_ir/reference.hpp"
#include "spai_ir/refine.hpp"
#include "spai_ir/analysis.hpp"
#include "spai_ir/report.hpp"
#include "spai_ir/experiments.hpp"
#include "spai_ir/tables.hpp"
