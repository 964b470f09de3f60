#pragma once

#include "closed_forms.hpp"
#include "congruence.hpp"
#include "core.hpp"
#include "errors.hpp"
#include "euclid.hpp"
#include "export.hpp"
#include "parallel.hpp"
#include "reflection.hpp"
#include "scene.hpp"
#include "vec3.hpp"
#include "verify.hpp"
#include "wirtinger.hpp"
