#pragma once

#include "kds/angular.hpp"
#include "kds/currents.hpp"
#include "kds/errors.hpp"
#include "kds/frequency.hpp"
#include "kds/geodesics.hpp"
#include "kds/geometry.hpp"
#include "kds/io.hpp"
#include "kds/params.hpp"
#include "kds/potential.hpp"
#include "kds/radial.hpp"
#include "kds/spectrum.hpp"
#include "kds/workpool.hpp"
