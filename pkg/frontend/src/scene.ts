// three.js scene: branch polylines, the level plane z = w, root
// markers, axes, and an orbit camera. Pure rendering; all geometry
// arrives precomputed from geometry.ts.

import * as THREE from "three";
import { OrbitControls } from "three/addons/controls/OrbitControls.js";

import { MARKER_COLOR, planeCorners, sceneModel, type Marker } from "./geometry.js";
import type { CurveSetDocument } from "./types.js";

export class SliceScene {
  private renderer: THREE.WebGLRenderer;
  private scene = new THREE.Scene();
  private camera: THREE.PerspectiveCamera;
  private controls: OrbitControls;
  private branchGroup = new THREE.Group();
  private levelGroup = new THREE.Group();
  private axesGroup = new THREE.Group();

  constructor(container: HTMLElement) {
    this.renderer = new THREE.WebGLRenderer({ antialias: true });
    this.renderer.setClearColor(0x10151c, 1);
    this.renderer.setSize(container.clientWidth, container.clientHeight);
    container.appendChild(this.renderer.domElement);

    this.camera = new THREE.PerspectiveCamera(
      45,
      container.clientWidth / container.clientHeight,
      0.01,
      1000,
    );
    this.camera.position.set(9, 7, 11);

    this.controls = new OrbitControls(this.camera, this.renderer.domElement);
    this.controls.enableDamping = true;

    this.scene.add(this.branchGroup, this.levelGroup, this.axesGroup);

    window.addEventListener("resize", () => {
      this.camera.aspect = container.clientWidth / container.clientHeight;
      this.camera.updateProjectionMatrix();
      this.renderer.setSize(container.clientWidth, container.clientHeight);
    });

    const tick = () => {
      requestAnimationFrame(tick);
      this.controls.update();
      this.renderer.render(this.scene, this.camera);
    };
    tick();
  }

  setDocument(doc: CurveSetDocument): void {
    this.clearGroup(this.branchGroup);
    this.clearGroup(this.levelGroup);
    for (const b of sceneModel(doc)) {
      const geom = new THREE.BufferGeometry();
      geom.setAttribute("position", new THREE.BufferAttribute(b.positions, 3));
      const mat = new THREE.LineBasicMaterial({ color: b.color, linewidth: b.width });
      this.branchGroup.add(new THREE.Line(geom, mat));
    }
    this.buildAxes(doc);
  }

  setLevel(doc: CurveSetDocument, w: number, markers: Marker[]): void {
    this.clearGroup(this.levelGroup);
    const plane = new THREE.BufferGeometry();
    plane.setAttribute("position", new THREE.BufferAttribute(planeCorners(doc, w), 3));
    const planeMat = new THREE.MeshBasicMaterial({
      color: 0x4a5568,
      transparent: true,
      opacity: 0.35,
      side: THREE.DoubleSide,
    });
    this.levelGroup.add(new THREE.Mesh(plane, planeMat));

    const sphere = new THREE.SphereGeometry(0.09, 16, 16);
    const mat = new THREE.MeshBasicMaterial({ color: MARKER_COLOR });
    for (const m of markers) {
      const mesh = new THREE.Mesh(sphere, mat);
      mesh.position.set(m.re, w, m.im);
      this.levelGroup.add(mesh);
    }
  }

  clearLevel(): void {
    this.clearGroup(this.levelGroup);
  }

  private buildAxes(doc: CurveSetDocument): void {
    this.clearGroup(this.axesGroup);
    const { x_min, x_max, y_min, y_max } = doc.window;
    const lines = new THREE.BufferGeometry();
    const span = Math.max(x_max - x_min, y_max - y_min) * 0.55;
    lines.setAttribute(
      "position",
      new THREE.BufferAttribute(
        new Float32Array([
          x_min, 0, 0, x_max, 0, 0,
          0, -span, 0, 0, span, 0,
          0, 0, y_min, 0, 0, y_max,
        ]),
        3,
      ),
    );
    this.axesGroup.add(
      new THREE.LineSegments(lines, new THREE.LineBasicMaterial({ color: 0x3f4a5a })),
    );
    this.axesGroup.add(this.label(doc.axes.x, x_max + 0.4, 0, 0));
    this.axesGroup.add(this.label(doc.axes.v, 0, span + 0.4, 0));
    this.axesGroup.add(this.label(doc.axes.y, 0, 0, y_max + 0.4));
  }

  private label(text: string, x: number, y: number, z: number): THREE.Sprite {
    const canvas = document.createElement("canvas");
    canvas.width = 128;
    canvas.height = 40;
    const ctx = canvas.getContext("2d")!;
    ctx.font = "24px sans-serif";
    ctx.fillStyle = "#cdd6e4";
    ctx.textBaseline = "middle";
    ctx.fillText(text, 4, 20);
    const sprite = new THREE.Sprite(
      new THREE.SpriteMaterial({ map: new THREE.CanvasTexture(canvas), depthTest: false }),
    );
    sprite.position.set(x, y, z);
    sprite.scale.set(1.6, 0.5, 1);
    return sprite;
  }

  private clearGroup(group: THREE.Group): void {
    for (const child of [...group.children]) {
      group.remove(child);
      const obj = child as THREE.Mesh;
      if (obj.geometry) obj.geometry.dispose();
    }
  }
}
