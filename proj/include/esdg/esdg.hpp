#pragma once

#include "esdg/cases.hpp"
#include "esdg/dgsem.hpp"
#include "esdg/diag.hpp"
#include "esdg/driver.hpp"
#include "esdg/error.hpp"
#include "esdg/field.hpp"
#include "esdg/limiter.hpp"
#include "esdg/mesh.hpp"
#include "esdg/mesh_io.hpp"
#include "esdg/oe.hpp"
#include "esdg/physics.hpp"
#include "esdg/refops.hpp"
#include "esdg/timeint.hpp"
