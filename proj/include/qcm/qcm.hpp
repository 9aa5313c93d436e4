#pragma once

#include "qcm/chart.hpp"
#include "qcm/constraints.hpp"
#include "qcm/dynamics.hpp"
#include "qcm/equivalence.hpp"
#include "qcm/geometry.hpp"
#include "qcm/system.hpp"
#include "qcm/systems.hpp"
