/**
 * GLSL 3.00 shaders: screen-space elliptical splats via the projected
 * 3D covariance, plus a plain line shader for the chunk-bounds overlay.
 */

export const SPLAT_VERT = `#version 300 es
precision highp float;

layout(location = 0) in vec2 corner;     // quad corner in [-1, 1]^2
layout(location = 1) in vec3 center;
layout(location = 2) in vec3 scaleAxes;
layout(location = 3) in vec4 rotation;   // quaternion, w x y z
layout(location = 4) in vec3 color;
layout(location = 5) in float opacity;

uniform mat4 view;
uniform mat4 projection;
uniform vec2 viewport;                   // pixels
uniform vec2 focal;                      // pixels

out vec2 local;                          // quad coords in sigma units
out vec3 fragColor;
out float fragOpacity;

mat3 quatToMat(vec4 q) {
  float w = q.x, x = q.y, y = q.z, z = q.w;
  return mat3(
    1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y + w * z), 2.0 * (x * z - w * y),
    2.0 * (x * y - w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z + w * x),
    2.0 * (x * z + w * y), 2.0 * (y * z - w * x), 1.0 - 2.0 * (x * x + y * y));
}

void main() {
  vec4 viewCenter = view * vec4(center, 1.0);
  if (viewCenter.z > -0.02) {            // behind or at the near plane
    gl_Position = vec4(0.0, 0.0, 2.0, 1.0);
    return;
  }

  mat3 R = quatToMat(rotation);
  mat3 S = mat3(scaleAxes.x, 0.0, 0.0, 0.0, scaleAxes.y, 0.0, 0.0, 0.0, scaleAxes.z);
  mat3 M = R * S;
  mat3 cov3d = M * transpose(M);

  float z = viewCenter.z;
  float invZ = 1.0 / z;
  mat3 J = mat3(
    focal.x * invZ, 0.0, 0.0,
    0.0, focal.y * invZ, 0.0,
    -focal.x * viewCenter.x * invZ * invZ, -focal.y * viewCenter.y * invZ * invZ, 0.0);
  mat3 W = mat3(view);
  mat3 T = J * W;
  mat3 cov2d = T * cov3d * transpose(T);

  float a = cov2d[0][0] + 0.3;
  float d = cov2d[1][1] + 0.3;
  float b = cov2d[0][1];
  float mid = 0.5 * (a + d);
  float radius = sqrt(max(0.0, 0.25 * (a - d) * (a - d) + b * b));
  float l1 = max(mid + radius, 0.01);
  float l2 = max(mid - radius, 0.01);
  vec2 major = normalize(abs(b) > 1e-9 ? vec2(b, l1 - a) : vec2(1.0, 0.0));
  vec2 minorAxis = vec2(-major.y, major.x);

  local = corner * 3.0;                  // draw out to 3 sigma
  vec2 pixelOffset = local.x * sqrt(l1) * major + local.y * sqrt(l2) * minorAxis;

  vec4 clip = projection * viewCenter;
  vec2 ndcOffset = pixelOffset * 2.0 / viewport * clip.w;
  gl_Position = vec4(clip.xy + ndcOffset, clip.zw);
  fragColor = color;
  fragOpacity = opacity;
}
`;

export const SPLAT_FRAG = `#version 300 es
precision highp float;

in vec2 local;
in vec3 fragColor;
in float fragOpacity;
out vec4 outColor;

void main() {
  float r2 = dot(local, local);
  float alpha = fragOpacity * exp(-0.5 * r2);
  if (alpha < 1.0 / 255.0) {
    discard;
  }
  outColor = vec4(fragColor * alpha, alpha);  // premultiplied
}
`;

export const LINE_VERT = `#version 300 es
precision highp float;
layout(location = 0) in vec3 position;
uniform mat4 view;
uniform mat4 projection;
void main() {
  gl_Position = projection * view * vec4(position, 1.0);
}
`;

export const LINE_FRAG = `#version 300 es
precision highp float;
uniform vec4 lineColor;
out vec4 outColor;
void main() {
  outColor = lineColor;
}
`;
