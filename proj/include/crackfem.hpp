#pragma once

#include "crackfem/core.hpp"
#include "crackfem/geometry.hpp"
#include "crackfem/mesh.hpp"
#include "crackfem/spatial.hpp"
#include "crackfem/crack.hpp"
#include "crackfem/refine.hpp"
#include "crackfem/assembly.hpp"
#include "crackfem/solve.hpp"
#include "crackfem/analysis.hpp"
#include "crackfem/config.hpp"
#include "crackfem/study.hpp"
