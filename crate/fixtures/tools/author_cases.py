"""Writes the benchmark cases, corrected documents and model transcripts.

Run from the fixtures directory. The LLM fixture files under llm/ are then
recorded from these transcripts with `cargo run --example record_fixtures`.
"""
import json
import os

CDN = '<script type="text/javascript" src="https://unpkg.com/vtk.js@34.4.0/vtk.js"></script>'


def page(title, js, container="container"):
    body = "\n".join(("    " + l) if l.strip() else "" for l in js.strip("\n").split("\n"))
    return f"""<!DOCTYPE html>
<html>
<head>
  <meta charset="utf-8" />
  <title>{title}</title>
  {CDN}
  <style>
    html, body {{ margin: 0; padding: 0; width: 100%; height: 100%; overflow: hidden; }}
    #{container} {{ width: 100vw; height: 100vh; }}
  </style>
</head>
<body>
  <div id="{container}"></div>
  <script type="text/javascript">
{body}
  </script>
</body>
</html>
"""


def mutate(doc, edits):
    """Applies (old, new) line substitutions; new=None deletes the line."""
    for old, new in edits:
        assert old in doc, old
        if new is None:
            lines = doc.split("\n")
            idx = [i for i, l in enumerate(lines) if old in l][0]
            del lines[idx]
            doc = "\n".join(lines)
        else:
            doc = doc.replace(old, new, 1)
    return doc


def write(path, text):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as f:
        f.write(text)


TASKS = {
    "slice": 'Generate an HTML page using vtk.js to visualize the rotor dataset: load the dataset from [data server]; set the active scalar array to "Pressure"; apply a slice along the Y axis at 95% depth of the dataset (convert percentage to slice index); use a blue → white → red color map for pressure values, spanning from the minimum to maximum scalar range; set opacity to fully opaque.',
    "volume": 'Generate an HTML page using vtk.js to visualize the Redsea dataset with volume rendering: load the dataset from [data server]; compute velocity magnitude from the "velocity" array and set it as the active scalar; apply volume rendering using a blue → white → red color map spanning the scalar range; apply a piecewise opacity function.',
    "mag-iso": "Generate an HTML page using vtk.js to visualize the Deepwater dataset with isosurface rendering: load the dataset from [data server]; compute magnitude from arrays [field names]; generate an isosurface at the mid-value of the scalar range; use a blue → white → red color map spanning the scalar range.",
    "streamline": 'Generate an HTML page using vtk.js to visualize the Isabel dataset with streamline rendering: load the dataset from [data server]; use the "Velocity" array as the vector field for streamlines; generate seed points at the center of the dataset with sufficient density to cover the domain; compute streamlines following the velocity field.',
}

ROTOR_QUERY = 'Generate HTML with vtk.js to visualize sliced rotor data by loading the dataset from [data server], setting "Pressure" as the active scalar. Applying a Y-axis slice at 80% depth, mapping pressure values to a blue → white → red color gradient with full opacity, Adding an XYZ axis orientation marker for spatial reference, and no GUI controls.'


def node(phase, name, modules, weight, description):
    return {"phase": phase, "name": name, "modules": modules, "weight": weight, "description": description}


PLANS = {
    "rotor": [
        node("Data Loading", "load_rotor", ["vtkXMLImageDataReader", "vtkHttpDataSetReader"], 3,
             "Read the rotor VTI dataset from [data server]."),
        node("Data Processing", "pressure_slice", ["vtkImageSlice", "vtkPlane"], 10,
             'Make "Pressure" the active scalar and cut a Y-axis slice at 80% of the depth.'),
        node("Visualization Setup", "pressure_colors", ["vtkColorTransferFunction"], 6,
             "Color pressure with a blue-white-red transfer function, fully opaque."),
        node("UI Components", "orientation_marker", ["vtkOrientationMarkerWidget"], 2,
             "Show XYZ axes as an orientation marker for spatial reference."),
        node("Rendering", "render", ["vtkGenericRenderWindow", "vtkRenderWindowInteractor"], 2,
             "Set up the render window and interactor and render the scene."),
    ],
    "slice": [
        node("Data Loading", "load_rotor", ["vtkHttpDataSetReader"], 3, "Load the rotor dataset from [data server]."),
        node("Data Processing", "y_slice", ["vtkImageMapper", "vtkImageSlice"], 10,
             'Activate "Pressure" and slice along Y at index round(0.95 * (ny - 1)).'),
        node("Visualization Setup", "pressure_colors", ["vtkColorTransferFunction"], 6,
             "Blue-white-red color map over the full pressure range, opacity 1."),
        node("Rendering", "render", ["vtkGenericRenderWindow"], 2, "Render window bound to the page container."),
    ],
    "volume": [
        node("Data Loading", "load_redsea", ["vtkHttpDataSetReader"], 3, "Load the Redsea dataset from [data server]."),
        node("Data Processing", "velocity_magnitude", ["vtkDataArray"], 7,
             'Compute |velocity| per point from the "velocity" array and make it the active scalar.'),
        node("Volume Rendering", "volume", ["vtkVolumeMapper", "vtkVolume"], 10, "Ray-cast the magnitude field as a volume."),
        node("Visualization Setup", "transfer_functions", ["vtkColorTransferFunction", "vtkPiecewiseFunction"], 6,
             "Blue-white-red colors over the scalar range and a piecewise opacity ramp."),
        node("Rendering", "render", ["vtkFullScreenRenderWindow"], 2, "Full-screen render window."),
    ],
    "mag-iso": [
        node("Data Loading", "load_deepwater", ["vtkHttpDataSetReader"], 3, "Load the Deepwater dataset from [data server]."),
        node("Data Processing", "magnitude", ["vtkCalculator", "vtkDataArray"], 7,
             "Compute the magnitude of the listed arrays as a new active scalar."),
        node("Isosurface", "mid_isosurface", ["vtkImageMarchingCubes"], 10,
             "Extract the isosurface at the middle of the magnitude range."),
        node("Visualization Setup", "surface_colors", ["vtkColorTransferFunction", "vtkMapper"], 6,
             "Map scalars with a blue-white-red lookup table over the range."),
        node("Rendering", "render", ["vtkActor", "vtkFullScreenRenderWindow"], 2, "Add the surface actor and render."),
    ],
    "streamline": [
        node("Data Loading", "load_isabel", ["vtkHttpDataSetReader"], 3, "Load the Isabel dataset from [data server]."),
        node("Seeding", "center_seeds", ["vtkPointSource"], 7, "Dense seed cloud at the dataset center."),
        node("Data Processing", "streamlines", ["vtkImageStreamline"], 10,
             'Integrate streamlines through the "Velocity" vector field.'),
        node("Rendering", "render", ["vtkMapper", "vtkActor", "vtkFullScreenRenderWindow"], 2,
             "Render the streamline polylines."),
    ],
}


def plan_reply(name):
    body = json.dumps({"nodes": PLANS[name]}, indent=2, ensure_ascii=False)
    return f"Here is the pipeline plan.\n\n```json\n{body}\n```\n"


# reference implementations (ground truth)

SLICE_REF = """
const container = document.getElementById('container');
const genericRenderWindow = vtk.Rendering.Misc.vtkGenericRenderWindow.newInstance({ background: [0.1, 0.1, 0.1] });
genericRenderWindow.setContainer(container);
genericRenderWindow.resize();
const renderer = genericRenderWindow.getRenderer();
const renderWindow = genericRenderWindow.getRenderWindow();

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance({ fetchGzip: true });
reader.setUrl('[data server]/rotor').then(() => reader.loadData()).then(() => {
  const imageData = reader.getOutputData();
  const pointData = imageData.getPointData();
  pointData.setActiveScalars('Pressure');
  const range = pointData.getScalars().getRange();

  const extent = imageData.getExtent();
  const sliceIndex = Math.round(extent[2] + 0.95 * (extent[3] - extent[2]));

  const mapper = vtk.Rendering.Core.vtkImageMapper.newInstance();
  mapper.setInputData(imageData);
  mapper.setSlicingMode(vtk.Rendering.Core.vtkImageMapper.SlicingMode.J);
  mapper.setSlice(sliceIndex);

  const ctf = vtk.Rendering.Core.vtkColorTransferFunction.newInstance();
  ctf.addRGBPoint(range[0], 0.0, 0.0, 1.0);
  ctf.addRGBPoint((range[0] + range[1]) / 2, 1.0, 1.0, 1.0);
  ctf.addRGBPoint(range[1], 1.0, 0.0, 0.0);

  const slice = vtk.Rendering.Core.vtkImageSlice.newInstance();
  slice.setMapper(mapper);
  slice.getProperty().setRGBTransferFunction(0, ctf);
  slice.getProperty().setOpacity(1.0);

  renderer.addViewProp(slice);
  renderer.resetCamera();
  renderWindow.render();
});
"""

VOLUME_REF = """
const fullScreenRenderer = vtk.Rendering.Misc.vtkFullScreenRenderWindow.newInstance({ background: [0, 0, 0] });
const renderer = fullScreenRenderer.getRenderer();
const renderWindow = fullScreenRenderer.getRenderWindow();

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance({ fetchGzip: true });
reader.setUrl('[data server]/redsea').then(() => reader.loadData()).then(() => {
  const imageData = reader.getOutputData();
  const velocity = imageData.getPointData().getArrayByName('velocity');
  const v = velocity.getData();
  const n = velocity.getNumberOfTuples();
  const magnitude = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    magnitude[i] = Math.hypot(v[3 * i], v[3 * i + 1], v[3 * i + 2]);
  }
  const magArray = vtk.Common.Core.vtkDataArray.newInstance({ name: 'velocity_magnitude', values: magnitude });
  imageData.getPointData().addArray(magArray);
  imageData.getPointData().setActiveScalars('velocity_magnitude');
  const range = magArray.getRange();

  const mapper = vtk.Rendering.Core.vtkVolumeMapper.newInstance();
  mapper.setInputData(imageData);
  mapper.setSampleDistance(0.5);
  const volume = vtk.Rendering.Core.vtkVolume.newInstance();
  volume.setMapper(mapper);

  const ctf = vtk.Rendering.Core.vtkColorTransferFunction.newInstance();
  ctf.addRGBPoint(range[0], 0.0, 0.0, 1.0);
  ctf.addRGBPoint((range[0] + range[1]) / 2, 1.0, 1.0, 1.0);
  ctf.addRGBPoint(range[1], 1.0, 0.0, 0.0);
  const ofun = vtk.Common.DataModel.vtkPiecewiseFunction.newInstance();
  ofun.addPoint(range[0], 0.0);
  ofun.addPoint(range[0] + 0.5 * (range[1] - range[0]), 0.3);
  ofun.addPoint(range[1], 0.8);
  volume.getProperty().setRGBTransferFunction(0, ctf);
  volume.getProperty().setScalarOpacity(0, ofun);
  volume.getProperty().setInterpolationTypeToLinear();

  renderer.addVolume(volume);
  renderer.resetCamera();
  renderWindow.render();
});
"""

MAGISO_REF = """
const fullScreenRenderer = vtk.Rendering.Misc.vtkFullScreenRenderWindow.newInstance({ background: [0.15, 0.15, 0.15] });
const renderer = fullScreenRenderer.getRenderer();
const renderWindow = fullScreenRenderer.getRenderWindow();

const FIELDS = ['u', 'v', 'w'];
const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance({ fetchGzip: true });
reader.setUrl('[data server]/deepwater').then(() => reader.loadData()).then(() => {
  const imageData = reader.getOutputData();
  const pointData = imageData.getPointData();
  const arrays = FIELDS.map((name) => pointData.getArrayByName(name).getData());
  const n = arrays[0].length;
  const magnitude = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    magnitude[i] = Math.sqrt(arrays.reduce((acc, a) => acc + a[i] * a[i], 0));
  }
  const magArray = vtk.Common.Core.vtkDataArray.newInstance({ name: 'magnitude', values: magnitude });
  pointData.addArray(magArray);
  pointData.setActiveScalars('magnitude');
  const range = magArray.getRange();

  const marchingCubes = vtk.Filters.General.vtkImageMarchingCubes.newInstance({ computeNormals: true, mergePoints: true });
  marchingCubes.setInputData(imageData);
  marchingCubes.setContourValue((range[0] + range[1]) / 2);

  const lut = vtk.Rendering.Core.vtkColorTransferFunction.newInstance();
  lut.addRGBPoint(range[0], 0.0, 0.0, 1.0);
  lut.addRGBPoint((range[0] + range[1]) / 2, 1.0, 1.0, 1.0);
  lut.addRGBPoint(range[1], 1.0, 0.0, 0.0);

  const mapper = vtk.Rendering.Core.vtkMapper.newInstance();
  mapper.setInputConnection(marchingCubes.getOutputPort());
  mapper.setLookupTable(lut);
  mapper.setScalarRange(range[0], range[1]);
  const actor = vtk.Rendering.Core.vtkActor.newInstance();
  actor.setMapper(mapper);

  renderer.addActor(actor);
  renderer.resetCamera();
  renderWindow.render();
});
"""

STREAM_REF = """
const fullScreenRenderer = vtk.Rendering.Misc.vtkFullScreenRenderWindow.newInstance({ background: [0, 0, 0] });
const renderer = fullScreenRenderer.getRenderer();
const renderWindow = fullScreenRenderer.getRenderWindow();

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance({ fetchGzip: true });
reader.setUrl('[data server]/isabel').then(() => reader.loadData()).then(() => {
  const imageData = reader.getOutputData();
  imageData.getPointData().setActiveVectors('Velocity');
  const bounds = imageData.getBounds();
  const center = imageData.getCenter();
  const diagonal = Math.hypot(bounds[1] - bounds[0], bounds[3] - bounds[2], bounds[5] - bounds[4]);

  const seeds = vtk.Filters.Sources.vtkPointSource.newInstance({
    numberOfPoints: 400,
    center,
    radius: 0.35 * diagonal,
  });

  const streamline = vtk.Filters.General.vtkImageStreamline.newInstance();
  streamline.setIntegrationStep(0.01 * diagonal);
  streamline.setMaximumNumberOfSteps(1000);
  streamline.setInputData(imageData);
  streamline.setInputConnection(seeds.getOutputPort(), 1);

  const mapper = vtk.Rendering.Core.vtkMapper.newInstance();
  mapper.setInputConnection(streamline.getOutputPort());
  const actor = vtk.Rendering.Core.vtkActor.newInstance();
  actor.setMapper(mapper);
  actor.getProperty().setColor(0.9, 0.9, 0.2);

  renderer.addActor(actor);
  renderer.resetCamera();
  renderWindow.render();
});
"""

REFS = {
    "slice": ("Rotor pressure slice", SLICE_REF),
    "volume": ("Redsea velocity magnitude volume", VOLUME_REF),
    "mag-iso": ("Deepwater magnitude isosurface", MAGISO_REF),
    "streamline": ("Isabel streamlines", STREAM_REF),
}
CATEGORIES = {"slice": "rendering", "volume": "rendering", "mag-iso": "filter", "streamline": "filter"}

# corrected documents: the references plus the comments the model left in place
CORRECTED_EDITS = {
    "slice": [("  const extent = imageData.getExtent();", "  // slice index from the Y extent\n  const extent = imageData.getExtent();")],
    "volume": [("  const magnitude = new Float32Array(n);", "  // velocity magnitude per point\n  const magnitude = new Float32Array(n);")],
    "mag-iso": [("  marchingCubes.setContourValue((range[0] + range[1]) / 2);", "  // isosurface at the mid value\n  marchingCubes.setContourValue((range[0] + range[1]) / 2);")],
    "streamline": [("  const seeds = vtk.Filters.Sources.vtkPointSource.newInstance({", "  // dense seed cloud around the center\n  const seeds = vtk.Filters.Sources.vtkPointSource.newInstance({")],
}

# what the model produced with retrieved examples: close, with a few slips
RAG_EDITS = {
    "slice": [
        ("SlicingMode.J", "SlicingMode.K"),
        ("  slice.getProperty().setOpacity(1.0);", None),
    ],
    "volume": [
        ("  imageData.getPointData().setActiveScalars('velocity_magnitude');", None),
        ("  volume.getProperty().setInterpolationTypeToLinear();", "  volume.getProperty().setInterpolationTypeToFastLinear();"),
    ],
    "mag-iso": [
        ("  mapper.setLookupTable(lut);", "  mapper.setColorTransferFunction(lut);"),
        ("  mapper.setScalarRange(range[0], range[1]);", None),
        ("  pointData.setActiveScalars('magnitude');", None),
    ],
    "streamline": [
        ("  streamline.setMaximumNumberOfSteps(1000);", None),
        ("    numberOfPoints: 400,", "    numberOfPoints: 40,"),
    ],
}

# without examples: plausible-looking code with invented calls and missing stages
NO_RAG = {
    "slice": """
const renderWindow = vtk.Rendering.Core.vtkRenderWindow.newInstance();
const renderer = vtk.Rendering.Core.vtkRenderer.newInstance();
renderWindow.addRenderer(renderer);

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance();
reader.setUrl('[data server]/rotor').then(() => {
  const imageData = reader.getOutputData();
  imageData.getPointData().setActiveScalars('Pressure');
  // slice at 95% depth along Y
  const slicer = vtk.Filters.General.vtkImageSlicer.newInstance({ axis: 'Y', position: 0.95 });
  slicer.setInputData(imageData);
  const mapper = vtk.Rendering.Core.vtkMapper.newInstance();
  mapper.setInputConnection(slicer.getOutputPort());
  mapper.setColorMap('blue-white-red');
  const actor = vtk.Rendering.Core.vtkActor.newInstance();
  actor.setMapper(mapper);
  actor.getProperty().setOpacity(1.0);
  renderer.addActor(actor);
  renderer.resetCamera();
  renderWindow.render();
});
""",
    "volume": """
const fullScreenRenderer = vtk.Rendering.Misc.vtkFullScreenRenderWindow.newInstance();
const renderer = fullScreenRenderer.getRenderer();
const renderWindow = fullScreenRenderer.getRenderWindow();

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance();
reader.setUrl('[data server]/redsea', { loadData: true }).then(() => {
  const imageData = reader.getOutputData();
  // magnitude of the velocity vectors
  const magnitude = imageData.getPointData().getArrayByName('velocity').computeMagnitude();
  imageData.getPointData().setScalars(magnitude);
  const mapper = vtk.Rendering.Core.vtkVolumeMapper.newInstance();
  mapper.setInputData(imageData);
  const volume = vtk.Rendering.Core.vtkVolume.newInstance();
  volume.setMapper(mapper);
  volume.getProperty().setColorMap('coolwarm');
  volume.getProperty().setOpacityRamp(0.0, 0.8);
  renderer.addVolume(volume);
  renderer.resetCamera();
  renderWindow.render();
});
""",
    "mag-iso": """
const fullScreenRenderer = vtk.Rendering.Misc.vtkFullScreenRenderWindow.newInstance();
const renderer = fullScreenRenderer.getRenderer();
const renderWindow = fullScreenRenderer.getRenderWindow();

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance();
reader.setUrl('[data server]/deepwater', { loadData: true }).then(() => {
  const calculator = vtk.Filters.General.vtkCalculator.newInstance();
  calculator.setInputConnection(reader.getOutputPort());
  calculator.setFormula('mag(u, v, w)');
  calculator.setResultArrayName('magnitude');
  const contour = vtk.Filters.General.vtkImageMarchingCubes.newInstance();
  contour.setInputConnection(calculator.getOutputPort());
  contour.setContourValue(0.5);
  const mapper = vtk.Rendering.Core.vtkMapper.newInstance();
  mapper.setInputConnection(contour.getOutputPort());
  mapper.setColorMap('blue-white-red');
  const actor = vtk.Rendering.Core.vtkActor.newInstance();
  actor.setMapper(mapper);
  renderer.addActor(actor);
  renderer.resetCamera();
  renderWindow.render();
});
""",
    "streamline": """
const fullScreenRenderer = vtk.Rendering.Misc.vtkFullScreenRenderWindow.newInstance();
const renderer = fullScreenRenderer.getRenderer();
const renderWindow = fullScreenRenderer.getRenderWindow();

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance();
reader.setUrl('[data server]/isabel', { loadData: true }).then(() => {
  const imageData = reader.getOutputData();
  const tracer = vtk.Filters.Flow.vtkStreamTracer.newInstance();
  tracer.setInputData(imageData);
  tracer.setVectors('Velocity');
  tracer.setSeedCenter(imageData.getCenter());
  tracer.setNumberOfSeeds(100);
  const mapper = vtk.Rendering.Core.vtkMapper.newInstance();
  mapper.setInputConnection(tracer.getOutputPort());
  const actor = vtk.Rendering.Core.vtkActor.newInstance();
  actor.setMapper(mapper);
  renderer.addActor(actor);
  renderer.resetCamera();
  renderWindow.render();
});
""",
}

ROTOR_GEN = """
const container = document.getElementById('container');
const genericRenderWindow = vtk.Rendering.Misc.vtkGenericRenderWindow.newInstance({ background: [0.1, 0.1, 0.1] });
genericRenderWindow.setContainer(container);
genericRenderWindow.resize();
const renderer = genericRenderWindow.getRenderer();
const renderWindow = genericRenderWindow.getRenderWindow();
const interactor = renderWindow.getInteractor();

const reader = vtk.IO.Core.vtkHttpDataSetReader.newInstance({ fetchGzip: true });
reader.setUrl('[data server]/rotor').then(() => reader.loadData()).then(() => {
  const imageData = reader.getOutputData();
  imageData.getPointData().setActiveScalars('Pressure');
  const range = imageData.getPointData().getScalars().getRange();
  const extent = imageData.getExtent();

  // Y-axis slice at 80% depth
  const mapper = vtk.Rendering.Core.vtkImageMapper.newInstance();
  mapper.setInputData(imageData);
  mapper.setSlicingMode(vtk.Rendering.Core.vtkImageMapper.SlicingMode.J);
  mapper.setSlice(Math.round(extent[2] + 0.8 * (extent[3] - extent[2])));

  const ctf = vtk.Rendering.Core.vtkColorTransferFunction.newInstance();
  ctf.addRGBPoint(range[0], 0.0, 0.0, 1.0);
  ctf.addRGBPoint((range[0] + range[1]) / 2, 1.0, 1.0, 1.0);
  ctf.addRGBPoint(range[1], 1.0, 0.0, 0.0);

  const slice = vtk.Rendering.Core.vtkImageSlice.newInstance();
  slice.setMapper(mapper);
  slice.getProperty().setRGBTransferFunction(0, ctf);
  slice.getProperty().setOpacity(1.0);
  renderer.addViewProp(slice);

  const axes = vtk.Rendering.Core.vtkAxesActor.newInstance();
  const marker = vtk.Interaction.Widgets.vtkOrientationMarkerWidget.newInstance({ actor: axes, interactor });
  marker.setEnabled(true);
  marker.setViewportSize(0.15);

  renderer.resetCamera();
  renderWindow.render();
});
"""

# the motivating pair: a basic shape page missing its pipeline stages, and the fix
MOTIVATING_BROKEN = """
const renderWindow = vtk.Rendering.Core.vtkRenderWindow.newInstance();
const renderer = vtk.Rendering.Core.vtkRenderer.newInstance();
renderWindow.addRenderer(renderer);

const cone = vtk.Filters.Sources.vtkConeSource.newInstance({ height: 1.0, radius: 0.5 });
const actor = vtk.Rendering.Core.vtkActor.newInstance();
actor.setInputConnection(cone.getOutputPort());

renderer.addActor(actor);
renderer.resetCamera();
renderWindow.render();
"""

MOTIVATING_FIXED = """
const fullScreenRenderer = vtk.Rendering.Misc.vtkFullScreenRenderWindow.newInstance({ background: [0.2, 0.3, 0.4] });
const renderer = fullScreenRenderer.getRenderer();
const renderWindow = fullScreenRenderer.getRenderWindow();

const cone = vtk.Filters.Sources.vtkConeSource.newInstance({ height: 1.0, radius: 0.5 });
const mapper = vtk.Rendering.Core.vtkMapper.newInstance();
mapper.setInputConnection(cone.getOutputPort());
const actor = vtk.Rendering.Core.vtkActor.newInstance();
actor.setMapper(mapper);

renderer.addActor(actor);
renderer.resetCamera();
renderWindow.render();
"""

MOTIVATING_PLAN = {
    "query": "Generate an HTML page with vtk.js that renders a cone.",
    "nodes": [
        node("Data Loading", "cone_source", ["vtkConeSource"], 8, "Create the cone geometry."),
        node("Visualization Setup", "map_geometry", ["vtkMapper", "vtkActor"], 6, "Map the polygons and wrap them in an actor."),
        node("Rendering", "render", ["vtkFullScreenRenderWindow"], 3, "Full-screen render window."),
    ],
}


def fenced(doc, before="", after=""):
    return f"{before}```html\n{doc}```\n{after}"


def main():
    transcripts = []

    def transcript(kind, key, text, arm=None, name=None):
        fname = name or f"{kind}_{key}{'_' + arm if arm else ''}.md"
        write(f"transcripts/{fname}", text)
        entry = {"kind": kind, "key": key, "response": fname}
        if arm:
            entry["arm"] = arm
        transcripts.append(entry)

    write("queries/rotor.txt", ROTOR_QUERY + "\n")
    write("plans/rotor.json", json.dumps({"query": ROTOR_QUERY, "nodes": PLANS["rotor"]}, indent=2, ensure_ascii=False) + "\n")
    transcript("plan", "rotor", plan_reply("rotor"))
    transcript("generate", "rotor",
               fenced(page("Rotor pressure slice", ROTOR_GEN),
                      before="Below is the complete document. It follows the retrieved slice example.\n\n",
                      after="\nOpen the file in a browser; the orientation marker sits in the lower-left corner.\n"),
               arm="rag")

    for case, text in TASKS.items():
        title, ref_js = REFS[case]
        reference = page(title, ref_js)
        write(f"cases/{case}/description.txt", text + "\n")
        write(f"cases/{case}/code.html", reference)
        write(f"cases/{case}/meta.json", json.dumps({"id": case, "category": CATEGORIES[case]}, indent=2) + "\n")
        corrected = mutate(reference, CORRECTED_EDITS[case])
        write(f"corrected/{case}.html", corrected)
        rag = mutate(corrected, RAG_EDITS[case])
        no_rag = page(title, NO_RAG[case])
        transcript("plan", case, plan_reply(case))
        transcript("generate", case, fenced(rag), arm="rag")
        transcript("generate", case, fenced(no_rag, before="Sure! Here is an implementation.\n\n"), arm="no-rag")

    transcript("grade", "slice", """```json
{
  "functionality": {"score": 0.9, "reasoning": "Loads the rotor data, activates Pressure and renders one slice; the slice is taken along the wrong axis."},
  "visual_fidelity": {"score": 0.8, "reasoning": "Blue-white-red map over the full range matches; opacity is left at its default."},
  "code_quality": {"score": 1.0, "reasoning": "Short, linear pipeline with clear names."}
}
```
""")
    transcript("baseline", "toy", '```json\n["E1", "E3"]\n```\n')

    write("docs/motivating_broken.html", page("Cone", MOTIVATING_BROKEN))
    write("docs/motivating_fixed.html", page("Cone", MOTIVATING_FIXED))
    write("plans/motivating.json", json.dumps(MOTIVATING_PLAN, indent=2) + "\n")
    write("plans/toy.json", json.dumps({
        "query": "slice with a plane and show actors",
        "nodes": [
            node("Data Processing", "N1", ["vtkImageSlice", "vtkPlane"], 10, "slice"),
            node("Rendering", "N2", ["vtkActor"], 2, "actors"),
        ],
    }, indent=2) + "\n")

    ten = [f"line {i}" for i in range(1, 11)]
    write("docs/ten_lines_a.txt", "\n".join(ten) + "\n")
    ten[6] = "line 7 (edited)"
    write("docs/ten_lines_b.txt", "\n".join(ten) + "\n")
    # 5 vs 8 lines with a 4-line common subsequence
    write("docs/five_lines.txt", "a\nb\nc\nd\ne\n")
    write("docs/eight_lines.txt", "a\nx\nb\nc\ny\nd\nz\nw\n")
    # four modules, one of them twice
    write("docs/four_modules.html", page("Four modules", """
const reader = vtk.IO.XML.vtkXMLImageDataReader.newInstance();
const slice = vtk.Rendering.Core.vtkImageSlice.newInstance();
const ctf = vtk.Rendering.Core.vtkColorTransferFunction.newInstance();
const other = vtk.Rendering.Core.vtkImageSlice.newInstance();
const view = vtk.Rendering.Misc.vtkGenericRenderWindow.newInstance();
"""))
    short_doc = page("Short", "const a = 1;\n")
    long_doc = page("Long", SLICE_REF)
    write("docs/two_documents.txt", f"First try:\n```html\n{short_doc}```\nBetter version:\n```html\n{long_doc}```\n")

    write("transcripts/index.json", json.dumps(transcripts, indent=2) + "\n")


if __name__ == "__main__":
    os.chdir(os.path.join(os.path.dirname(os.path.abspath(__file__)), ".."))
    main()
